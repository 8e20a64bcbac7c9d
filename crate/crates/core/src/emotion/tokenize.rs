/// Splits text into case-folded tokens.
///
/// A token is a maximal run of letters and digits, optionally led by a single
/// `#` or `@` glued to the run. Everything else separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut pending_prefix: Option<char> = None;

    for ch in text.chars() {
        if ch.is_alphanumeric() {
            if current.is_empty() {
                if let Some(prefix) = pending_prefix.take() {
                    current.push(prefix);
                }
            }
            current.extend(ch.to_lowercase());
            continue;
        }
        if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
        pending_prefix = matches!(ch, '#' | '@').then_some(ch);
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::tokenize;

    #[test]
    fn words_and_punctuation() {
        assert_eq!(
            tokenize("Snow yesterday, sunshine today."),
            ["snow", "yesterday", "sunshine", "today"]
        );
    }

    #[test]
    fn empty() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  ,.!? ").is_empty());
    }

    #[test]
    fn hashtags_and_mentions() {
        assert_eq!(tokenize("#iPhone7 rocks!"), ["#iphone7", "rocks"]);
        assert_eq!(tokenize("hi @Apple"), ["hi", "@apple"]);
        // Only one prefix char is kept, and only when glued to the run.
        assert_eq!(tokenize("##tag # lone @ x"), ["#tag", "lone", "x"]);
        assert_eq!(tokenize("a#b"), ["a", "#b"]);
    }

    #[test]
    fn unicode_letters_and_digits() {
        assert_eq!(tokenize("Café über 7"), ["café", "über", "7"]);
        assert_eq!(tokenize("don't"), ["don", "t"]);
    }
}
