use super::{PosTag, Token};

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '-' | '’')
}

/// Splits `text` into lowercased tokens.
///
/// A word is a maximal run of alphanumeric characters, where a single
/// apostrophe or hyphen is kept when it sits between two alphanumerics
/// (`don't`, `well-done`). Every other non-whitespace character becomes a
/// token of its own. Tokens come back tagged [`PosTag::Other`].
pub fn tokenize(text: &str) -> Vec<Token> {
    let lowered = text.to_lowercase();
    let chars: Vec<char> = lowered.chars().collect();
    let mut tokens = Vec::new();
    let mut word = String::new();

    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let joins = is_joiner(c) && !word.is_empty() && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if c.is_alphanumeric() || joins {
            word.push(c);
        } else {
            if !word.is_empty() {
                tokens.push(Token::new(std::mem::take(&mut word), PosTag::Other));
            }
            if !c.is_whitespace() {
                tokens.push(Token::new(c.to_string(), PosTag::Other));
            }
        }
        i += 1;
    }
    if !word.is_empty() {
        tokens.push(Token::new(word, PosTag::Other));
    }
    tokens
}

/// Joins token surfaces with single spaces.
pub fn detokenize(tokens: &[Token]) -> String {
    tokens
        .iter()
        .map(|t| t.surface.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn surfaces(text: &str) -> Vec<String> {
        tokenize(text).into_iter().map(|t| t.surface).collect()
    }

    #[test]
    fn empty_and_whitespace() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  \t\n ").is_empty());
    }

    #[test]
    fn lowercases_and_splits_punctuation() {
        assert_eq!(surfaces("Great PIZZA!"), vec!["great", "pizza", "!"]);
        assert_eq!(surfaces("Wow...ok"), vec!["wow", ".", ".", ".", "ok"]);
    }

    #[test]
    fn keeps_inner_joiners() {
        assert_eq!(surfaces("I don't like well-done steak"), vec![
            "i",
            "don't",
            "like",
            "well-done",
            "steak"
        ]);
        assert_eq!(surfaces("'quoted' -dash"), vec!["'", "quoted", "'", "-", "dash"]);
        assert_eq!(surfaces("a--b"), vec!["a", "-", "-", "b"]);
    }

    proptest! {
        #[test]
        fn idempotent_on_detokenized_output(text in "\\PC{0,60}") {
            let first = tokenize(&text);
            let again = tokenize(&detokenize(&first));
            prop_assert_eq!(first, again);
        }

        #[test]
        fn surfaces_are_non_empty_and_lowercase(text in "[a-zA-Z0-9 ,.!?'-]{0,60}") {
            for t in tokenize(&text) {
                prop_assert!(!t.surface.is_empty());
                prop_assert_eq!(t.surface.to_lowercase(), t.surface.clone());
                prop_assert!(!t.surface.chars().any(char::is_whitespace));
            }
        }
    }
}
