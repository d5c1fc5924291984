use super::{DatasetError, RatingMatrix};

/// Rating given to the first option of a ranked list; each later position gets one less.
pub const TOP_RANK_RATING: usize = 10;

/// Converts ranked option lists into ratings: first place gets 10, second 9, and so on.
///
/// Options missing from a list stay unknown. Lists may hold at most
/// [`TOP_RANK_RATING`] options so that every assigned rating is at least 1.
pub fn ranks_to_ratings<L: AsRef<[usize]>>(ranked_lists: &[L], n_options: usize) -> Result<RatingMatrix, DatasetError> {
    let mut m = RatingMatrix::new(ranked_lists.len(), n_options);
    for (user, list) in ranked_lists.iter().enumerate() {
        let list = list.as_ref();
        if list.len() > TOP_RANK_RATING {
            return Err(DatasetError::Validation(format!(
                "user {user} ranks {} options; at most {TOP_RANK_RATING} can be converted",
                list.len()
            )));
        }
        for (pos, &option) in list.iter().enumerate() {
            if option >= n_options {
                return Err(DatasetError::OutOfRange {
                    user,
                    option,
                    n_users: ranked_lists.len(),
                    n_options,
                });
            }
            if m.get(user, option).is_some() {
                return Err(DatasetError::Validation(format!(
                    "user {user} ranks option {} twice",
                    option + 1
                )));
            }
            m.set(user, option, Some((TOP_RANK_RATING - pos) as f64))?;
        }
    }
    Ok(m)
}

/// Replaces every known rating by its square.
pub fn square_ratings(m: &RatingMatrix) -> RatingMatrix {
    m.map_known(|r| r * r)
}
