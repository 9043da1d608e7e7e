use alloc::string::String;

/// Length of a string in Unicode scalar values.
pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

/// Slice `text` by character offsets, `start` inclusive and `end` exclusive.
/// Returns `None` when the range is empty, inverted or out of bounds.
pub fn char_slice(text: &str, start: usize, end: usize) -> Option<String> {
    if start >= end {
        return None;
    }
    let mut out = String::new();
    let mut count = 0usize;
    for ch in text.chars() {
        if count >= end {
            break;
        }
        if count >= start {
            out.push(ch);
        }
        count += 1;
    }
    if count < end {
        return None;
    }
    Some(out)
}

/// Canonical text key for duplicate detection: lowercased, with every run of
/// whitespace collapsed to a single space and outer whitespace trimmed.
pub fn normalized_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for ch in text.chars() {
        if ch.is_whitespace() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            for lower in ch.to_lowercase() {
                out.push(lower);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char_slice_counts_scalars_not_bytes() {
        assert_eq!(char_slice("héllo", 1, 3).as_deref(), Some("él"));
        assert_eq!(char_slice("abc", 0, 3).as_deref(), Some("abc"));
        assert_eq!(char_slice("abc", 2, 2), None);
        assert_eq!(char_slice("abc", 1, 4), None);
    }

    #[test]
    fn normalization_collapses_case_and_whitespace() {
        assert_eq!(normalized_text("John  met\tMary "), "john met mary");
        assert_eq!(normalized_text("  "), "");
        assert_eq!(normalized_text("a"), "a");
    }
}
