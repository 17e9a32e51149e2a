const PAD: &str = "<pad>";

fn offset(k: isize) -> String {
    if k == 0 {
        "0".to_string()
    } else {
        format!("-{k}")
    }
}

/// Sparse binary features for "does a segment end after `position`",
/// observed `shift` tokens later.
///
/// * `bias`, `shift=S`
/// * `u-K:TOK` unigrams for the `window` tokens ending at `position`
///   (`u0` is the token at `position`), padded before the stream start
/// * `b-K:A_B` bigrams ending at `position - K` inside that window
/// * `rJ:TOK`, `rbJ:A_B` unigrams and bigrams for the `shift` tokens right
///   of `position`
///
/// `tokens` must contain indices `0..=position + shift`.
pub fn extract_features<S: AsRef<str>>(tokens: &[S], position: usize, shift: usize, window: usize) -> Vec<String> {
    let at = |i: isize| -> &str {
        if i < 0 {
            PAD
        } else {
            tokens[i as usize].as_ref()
        }
    };
    let p = position as isize;
    let mut out = Vec::with_capacity(3 + 2 * window + 2 * shift);
    out.push("bias".to_string());
    out.push(format!("shift={shift}"));
    for k in 0..window as isize {
        out.push(format!("u{}:{}", offset(k), at(p - k)));
    }
    for k in 0..window.saturating_sub(1) as isize {
        out.push(format!("b{}:{}_{}", offset(k), at(p - k - 1), at(p - k)));
    }
    for j in 1..=shift as isize {
        out.push(format!("r{j}:{}", at(p + j)));
        out.push(format!("rb{j}:{}_{}", at(p + j - 1), at(p + j)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn left_context_at_shift_zero() {
        let f = extract_features(&["let", "me", "see"], 2, 0, 4);
        assert!(f.contains(&"u0:see".to_string()));
        assert!(f.contains(&"b0:me_see".to_string()));
        assert!(f.contains(&"u-1:me".to_string()));
        assert!(f.contains(&"u-3:<pad>".to_string()));
        assert!(f.contains(&"shift=0".to_string()));
        assert!(!f.iter().any(|x| x.starts_with('r')));
    }

    #[test]
    fn right_context_with_shift() {
        let f = extract_features(&["let", "me", "see", "if", "I"], 2, 2, 4);
        assert!(f.contains(&"u0:see".to_string()));
        assert!(f.contains(&"b0:me_see".to_string()));
        assert!(f.contains(&"r1:if".to_string()));
        assert!(f.contains(&"r2:I".to_string()));
        assert!(f.contains(&"rb1:see_if".to_string()));
        assert!(f.contains(&"shift=2".to_string()));
    }

    #[test]
    fn stream_start_is_padded() {
        let f = extract_features(&["tea"], 0, 0, 3);
        assert!(!f.is_empty());
        assert_eq!(
            f,
            vec!["bias", "shift=0", "u0:tea", "u-1:<pad>", "u-2:<pad>", "b0:<pad>_tea", "b-1:<pad>_<pad>"]
        );
    }

    #[test]
    fn features_are_unique() {
        let f = extract_features(&["a", "a", "a", "a", "a"], 2, 2, 4);
        let mut g = f.clone();
        g.sort();
        g.dedup();
        assert_eq!(f.len(), g.len());
    }
}
