/// Lowercases a raw token and maps every ASCII digit to `9`. The flag records
/// whether the raw token contained any uppercase letter.
pub fn normalize(raw: &str) -> (String, bool) {
    let cap = raw.chars().any(char::is_uppercase);
    let canonical = raw
        .to_lowercase()
        .chars()
        .map(|c| if c.is_ascii_digit() { '9' } else { c })
        .collect();
    (canonical, cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(normalize("Paris"), ("paris".to_string(), true));
        assert_eq!(normalize("1984"), ("9999".to_string(), false));
        assert_eq!(normalize("B2B"), ("b9b".to_string(), true));
        assert_eq!(normalize("naïve"), ("naïve".to_string(), false));
    }

    proptest::proptest! {
        #[test]
        fn idempotent(w in "\\PC{1,12}") {
            let (once, _) = normalize(&w);
            let (twice, _) = normalize(&once);
            proptest::prop_assert_eq!(&twice, &once);
        }
    }
}
