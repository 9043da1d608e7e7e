use alloc::string::String;
use alloc::vec::Vec;

/// A whitespace-delimited token with character offsets into the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Whitespace segmentation over the raw string, case preserved.
///
/// Offsets count Unicode scalar values. The tokens partition the
/// non-whitespace characters of the input in order.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut start = 0usize;
    for (pos, ch) in text.chars().enumerate() {
        if ch.is_whitespace() {
            if !current.is_empty() {
                tokens.push(Token {
                    text: core::mem::take(&mut current),
                    start,
                    end: pos,
                });
            }
        } else {
            if current.is_empty() {
                start = pos;
            }
            current.push(ch);
        }
    }
    if !current.is_empty() {
        let end = start + current.chars().count();
        tokens.push(Token {
            text: current,
            start,
            end,
        });
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::text::char_slice;

    #[test]
    fn empty_input_yields_no_tokens() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \t\n").is_empty());
    }

    #[test]
    fn two_words() {
        let toks = tokenize("john lives");
        assert_eq!(toks.len(), 2);
        assert_eq!((toks[0].text.as_str(), toks[0].start, toks[0].end), ("john", 0, 4));
        assert_eq!((toks[1].text.as_str(), toks[1].start, toks[1].end), ("lives", 5, 10));
    }

    #[test]
    fn double_space_is_skipped() {
        let toks = tokenize("a  b");
        assert_eq!((toks[0].text.as_str(), toks[0].start, toks[0].end), ("a", 0, 1));
        assert_eq!((toks[1].text.as_str(), toks[1].start, toks[1].end), ("b", 3, 4));
    }

    #[test]
    fn offsets_recover_token_text() {
        let text = "héllo  wörld\tx";
        for tok in tokenize(text) {
            assert_eq!(char_slice(text, tok.start, tok.end).as_deref(), Some(tok.text.as_str()));
        }
    }
}
