use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::corpus::{char_len, EntitySpan, LabelSchema, LabeledExample, Provenance, TaskKind};

/// Bookkeeping for one parsed response. `raw_blocks` always equals
/// `parsed_ok + dropped_examples`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseStats {
    pub raw_blocks: usize,
    pub parsed_ok: usize,
    pub dropped_entities: usize,
    pub dropped_examples: usize,
    pub schema_violations: usize,
}

impl ParseStats {
    pub fn reconciles(&self) -> bool {
        self.raw_blocks == self.parsed_ok + self.dropped_examples
    }

    pub fn merge(&mut self, other: &ParseStats) {
        self.raw_blocks += other.raw_blocks;
        self.parsed_ok += other.parsed_ok;
        self.dropped_entities += other.dropped_entities;
        self.dropped_examples += other.dropped_examples;
        self.schema_violations += other.schema_violations;
    }
}

/// Validated examples recovered from one raw LLM response.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationBatch {
    pub examples: Vec<LabeledExample>,
    pub stats: ParseStats,
}

/// Map entity mentions to character spans.
///
/// Mentions are processed in the given order; each one takes its first
/// occurrence (left to right, counting characters) that does not overlap a
/// span already claimed. Unmatched or empty mentions are simply omitted.
pub fn align_entities(text: &str, mentions: &[(String, String)]) -> Vec<EntitySpan> {
    let chars: Vec<char> = text.chars().collect();
    let mut claimed: Vec<(usize, usize)> = Vec::new();
    let mut spans = Vec::new();
    for (mention, label) in mentions {
        let needle: Vec<char> = mention.chars().collect();
        if needle.is_empty() || needle.len() > chars.len() {
            continue;
        }
        let mut found = None;
        for start in 0..=(chars.len() - needle.len()) {
            let end = start + needle.len();
            if chars[start..end] != needle[..] {
                continue;
            }
            if claimed.iter().any(|&(s, e)| start < e && s < end) {
                continue;
            }
            found = Some((start, end));
            break;
        }
        if let Some((start, end)) = found {
            claimed.push((start, end));
            spans.push(EntitySpan::new(start, end, label.clone(), mention.clone()));
        }
    }
    spans.sort_by_key(|s| (s.start, s.end));
    spans
}

struct Block {
    text: String,
    entities: Option<String>,
    class_label: Option<String>,
}

fn split_blocks(raw: &str) -> Vec<Block> {
    let mut blocks: Vec<Block> = Vec::new();
    for line in raw.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("Text:") {
            blocks.push(Block {
                text: rest.trim().to_string(),
                entities: None,
                class_label: None,
            });
        } else if let Some(rest) = line.strip_prefix("Entities:") {
            if let Some(block) = blocks.last_mut() {
                if block.entities.is_none() && block.class_label.is_none() {
                    block.entities = Some(rest.trim().to_string());
                }
            }
        } else if let Some(rest) = line.strip_prefix("Label:") {
            if let Some(block) = blocks.last_mut() {
                if block.entities.is_none() && block.class_label.is_none() {
                    block.class_label = Some(rest.trim().to_string());
                }
            }
        } else if !line.is_empty() {
            // Continuation of a multi-line text, as long as the block has
            // not been terminated by an annotation line yet.
            if let Some(block) = blocks.last_mut() {
                if block.entities.is_none() && block.class_label.is_none() {
                    if !block.text.is_empty() {
                        block.text.push(' ');
                    }
                    block.text.push_str(line);
                }
            }
        }
    }
    blocks
}

fn parse_entity_list(list: &str) -> (Vec<(String, String)>, usize) {
    let trimmed = list.trim().trim_start_matches('[').trim_end_matches(']').trim();
    if trimmed.is_empty() {
        return (Vec::new(), 0);
    }
    let mut mentions = Vec::new();
    let mut malformed = 0usize;
    for item in trimmed.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        match item.rsplit_once(':') {
            Some((mention, label)) if !mention.trim().is_empty() && !label.trim().is_empty() => {
                mentions.push((mention.trim().to_string(), label.trim().to_string()));
            }
            _ => malformed += 1,
        }
    }
    (mentions, malformed)
}

/// Parse one raw response into validated examples. Parsing is total: every
/// failure mode becomes a counter in the returned stats.
pub fn parse_generation(
    raw: &str,
    schema: &LabelSchema,
    provenance: Provenance,
    min_text_len: usize,
) -> GenerationBatch {
    let mut stats = ParseStats::default();
    let mut examples = Vec::new();

    for block in split_blocks(raw) {
        stats.raw_blocks += 1;
        if char_len(&block.text) < min_text_len.max(1) {
            stats.dropped_examples += 1;
            continue;
        }
        match schema.task() {
            TaskKind::Ner => {
                let Some(entity_list) = block.entities else {
                    stats.dropped_examples += 1;
                    continue;
                };
                let (mentions, malformed) = parse_entity_list(&entity_list);
                stats.dropped_entities += malformed;
                let mut kept = Vec::new();
                for (mention, label) in mentions {
                    if schema.contains(&label) {
                        kept.push((mention, label));
                    } else {
                        stats.schema_violations += 1;
                        stats.dropped_entities += 1;
                    }
                }
                let requested = kept.len();
                let spans = align_entities(&block.text, &kept);
                stats.dropped_entities += requested - spans.len();
                // Examples whose entities all failed to align stay in as
                // entity-free negatives; they regularize the tagger.
                examples.push(LabeledExample::ner(block.text, spans, provenance));
                stats.parsed_ok += 1;
            }
            TaskKind::Tc => {
                let Some(label) = block.class_label else {
                    stats.dropped_examples += 1;
                    continue;
                };
                if !schema.contains(&label) {
                    stats.schema_violations += 1;
                    stats.dropped_examples += 1;
                    continue;
                }
                examples.push(LabeledExample::tc(block.text, label, provenance));
                stats.parsed_ok += 1;
            }
        }
    }

    GenerationBatch { examples, stats }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{validate_example, Label};
    use alloc::vec;

    fn ner_schema() -> LabelSchema {
        LabelSchema::new(
            TaskKind::Ner,
            "demo",
            vec![Label::new("person"), Label::new("location")],
        )
        .unwrap()
    }

    #[test]
    fn simple_block_parses_with_aligned_spans() {
        let raw = "Text: john met mary\nEntities: [john:person, mary:person]";
        let batch = parse_generation(raw, &ner_schema(), Provenance::SeedGen, 5);
        assert_eq!(batch.stats.raw_blocks, 1);
        assert_eq!(batch.stats.parsed_ok, 1);
        assert_eq!(batch.examples.len(), 1);
        let spans = batch.examples[0].entities().unwrap();
        assert_eq!(spans.len(), 2);
        assert_eq!((spans[0].start, spans[0].end), (0, 4));
        assert_eq!((spans[1].start, spans[1].end), (9, 13));
        assert!(validate_example(&batch.examples[0], &ner_schema()).is_valid());
    }

    #[test]
    fn garbage_without_text_marker_yields_nothing() {
        let batch = parse_generation("no structure here at all", &ner_schema(), Provenance::SeedGen, 5);
        assert_eq!(batch.stats.raw_blocks, 0);
        assert!(batch.examples.is_empty());
        assert!(batch.stats.reconciles());
    }

    #[test]
    fn absent_mention_is_dropped_but_example_kept() {
        let raw = "Text: alice waved from the window\nEntities: [alice:person, bob:person]";
        let batch = parse_generation(raw, &ner_schema(), Provenance::SeedGen, 5);
        assert_eq!(batch.stats.parsed_ok, 1);
        assert_eq!(batch.stats.dropped_entities, 1);
        assert_eq!(batch.examples[0].entities().unwrap().len(), 1);
    }

    #[test]
    fn unknown_label_counts_as_schema_violation() {
        let raw = "Text: the cafe near the bridge\nEntities: [cafe:venue]";
        let batch = parse_generation(raw, &ner_schema(), Provenance::SeedGen, 5);
        assert_eq!(batch.stats.schema_violations, 1);
        assert_eq!(batch.stats.dropped_entities, 1);
        assert_eq!(batch.examples[0].entities().unwrap().len(), 0);
    }

    #[test]
    fn short_text_is_dropped_and_counted() {
        let raw = "Text: hi\nEntities: []\nText: a sentence of reasonable length\nEntities: []";
        let batch = parse_generation(raw, &ner_schema(), Provenance::SeedGen, 20);
        assert_eq!(batch.stats.raw_blocks, 2);
        assert_eq!(batch.stats.parsed_ok, 1);
        assert_eq!(batch.stats.dropped_examples, 1);
        assert!(batch.stats.reconciles());
    }

    #[test]
    fn tc_parsing_accepts_known_labels_only() {
        let schema = LabelSchema::new(
            TaskKind::Tc,
            "demo",
            vec![Label::new("sports"), Label::new("finance")],
        )
        .unwrap();
        let raw = "Text: the index closed higher today\nLabel: finance\n\
                   Text: a late goal settled the derby\nLabel: weather";
        let batch = parse_generation(raw, &schema, Provenance::SeedGen, 5);
        assert_eq!(batch.stats.raw_blocks, 2);
        assert_eq!(batch.stats.parsed_ok, 1);
        assert_eq!(batch.stats.dropped_examples, 1);
        assert_eq!(batch.stats.schema_violations, 1);
        assert_eq!(batch.examples[0].class_label(), Some("finance"));
    }

    #[test]
    fn ner_block_missing_entities_line_is_dropped() {
        let raw = "Text: a block with no annotation line\nText: another one with it\nEntities: []";
        let batch = parse_generation(raw, &ner_schema(), Provenance::SeedGen, 5);
        assert_eq!(batch.stats.raw_blocks, 2);
        assert_eq!(batch.stats.parsed_ok, 1);
        assert_eq!(batch.stats.dropped_examples, 1);
    }

    #[test]
    fn repeated_mentions_claim_distinct_occurrences() {
        let spans = align_entities(
            "a b a",
            &[
                ("a".to_string(), "person".to_string()),
                ("a".to_string(), "person".to_string()),
            ],
        );
        assert_eq!(spans.len(), 2);
        assert_eq!((spans[0].start, spans[0].end), (0, 1));
        assert_eq!((spans[1].start, spans[1].end), (4, 5));
    }

    #[test]
    fn align_handles_missing_and_empty_mentions() {
        assert!(align_entities("abc", &[("xyz".to_string(), "x".to_string())]).is_empty());
        assert!(align_entities("abc", &[]).is_empty());
        assert!(align_entities("abc", &[(String::new(), "x".to_string())]).is_empty());
    }

    #[test]
    fn align_counts_characters_not_bytes() {
        let spans = align_entities(
            "café münchen café",
            &[("café".to_string(), "location".to_string()), ("café".to_string(), "location".to_string())],
        );
        assert_eq!((spans[0].start, spans[0].end), (0, 4));
        assert_eq!((spans[1].start, spans[1].end), (13, 17));
    }

    #[test]
    fn multiline_text_is_joined() {
        let raw = "Text: the first half of a sentence\nthat spills onto a second line\nEntities: []";
        let batch = parse_generation(raw, &ner_schema(), Provenance::SeedGen, 5);
        assert_eq!(batch.examples[0].text, "the first half of a sentence that spills onto a second line");
    }
}
