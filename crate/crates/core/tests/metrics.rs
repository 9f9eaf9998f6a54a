use kdac::nn::metrics::{extract_spans, parse_tags, render_spans, span_prf, Span, Tag, TagSequence};
use proptest::prelude::*;

/// Well-formed BIO sequences built from random non-overlapping spans.
fn well_formed() -> impl Strategy<Value = Vec<Tag>> {
    proptest::collection::vec((0usize..3, 1usize..4, prop_oneof![Just("PER"), Just("LOC")]), 0..6).prop_map(|pieces| {
        let mut spans = Vec::new();
        let mut pos = 0;
        for (gap, width, kind) in pieces {
            let start = pos + gap;
            spans.push(Span {
                start,
                end: start + width,
                kind: kind.to_string(),
            });
            pos = start + width;
        }
        render_spans(&spans, pos + 1)
    })
}

fn pair() -> impl Strategy<Value = (Vec<Tag>, Vec<Tag>)> {
    (well_formed(), well_formed()).prop_map(|(mut a, mut b)| {
        let n = a.len().max(b.len());
        a.resize(n, Tag::Outside);
        b.resize(n, Tag::Outside);
        (a, b)
    })
}

proptest! {
    #[test]
    fn swapping_swaps_precision_and_recall((g, p) in pair()) {
        let (g, p) = (TagSequence::from_labels(g), TagSequence::from_labels(p));
        let forward = span_prf(&g, &p).unwrap();
        let back = span_prf(&p, &g).unwrap();
        prop_assert_eq!(forward.precision, back.recall);
        prop_assert_eq!(forward.recall, back.precision);
        prop_assert_eq!(forward.f1, back.f1);
    }

    #[test]
    fn render_inverts_extract(tags in well_formed()) {
        prop_assert_eq!(render_spans(&extract_spans(&tags), tags.len()), tags);
    }

    #[test]
    fn self_match_is_perfect_when_entities_exist(tags in well_formed()) {
        let s = TagSequence::from_labels(tags);
        let prf = span_prf(&s, &s).unwrap();
        let expect = if extract_spans(&s.labels).is_empty() { 0.0 } else { 1.0 };
        prop_assert_eq!(prf.f1, expect);
    }
}

#[test]
fn errors() {
    let g = TagSequence::from_labels(parse_tags("B-PER O").unwrap());
    let p = TagSequence::from_labels(parse_tags("O").unwrap());
    assert!(span_prf(&g, &p).is_err());
    let bad_gold = TagSequence::from_labels(parse_tags("O I-PER").unwrap());
    assert!(span_prf(&bad_gold, &bad_gold).is_err());
    assert!(parse_tags("B-PER X").is_err());
}
