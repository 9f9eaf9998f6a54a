//! Synthetic tasks and their line-oriented text formats.
//!
//! * Regression: two inputs drawn uniformly from `[-2, 2]`, target
//!   `|x1| + sin(2 x2)`, so targets lie in `[-1, 3]`. The kink along
//!   `x1 = 0` needs useful gradients on both sides of zero.
//! * Tagging: sequences over a 24-symbol alphabet. A trigger symbol (1 for
//!   `PER`, 2 for `LOC`) is followed by one or two entity symbols and the
//!   closing symbol 3. Entity symbols are drawn from the same pool as the
//!   filler, so a symbol's label is decided by its neighbours, not by its
//!   identity. Entity tokens make up between 5% and 40% of all labels.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::metrics::{Tag, TagSequence};
use crate::numfmt::fmt17;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionSample {
    pub x: [f64; 2],
    pub target: f64,
}

pub fn regression_target(x: [f64; 2]) -> f64 {
    x[0].abs() + (2.0 * x[1]).sin()
}

pub fn gen_regression_task(seed: u64, n_samples: usize) -> Vec<RegressionSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_samples)
        .map(|_| {
            let x = [rng.random_range(-2.0..=2.0), rng.random_range(-2.0..=2.0)];
            RegressionSample {
                x,
                target: regression_target(x),
            }
        })
        .collect()
}

/// Padding symbol used outside a sequence; never emitted by the generator.
pub const PAD: u32 = 0;
pub const TRIGGER_PER: u32 = 1;
pub const TRIGGER_LOC: u32 = 2;
pub const CLOSE: u32 = 3;
pub const FIRST_FILLER: u32 = 4;
pub const VOCAB: u32 = 24;

/// Label ids used by the window classifier.
pub const LABELS: [&str; 5] = ["O", "B-PER", "I-PER", "B-LOC", "I-LOC"];

/// Half-width of the feature window around each token.
pub const WINDOW_RADIUS: usize = 2;

pub fn label_id(tag: &Tag) -> usize {
    let s = tag.to_string();
    LABELS.iter().position(|&l| l == s).unwrap_or(0)
}

pub fn label_tag(id: usize) -> Tag {
    LABELS[id].parse().expect("LABELS are valid tags")
}

pub fn gen_toy_tagging_task(seed: u64, n_sequences: usize) -> Vec<TagSequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let filler = |rng: &mut ChaCha8Rng| rng.random_range(FIRST_FILLER..VOCAB);
    (0..n_sequences)
        .map(|_| {
            let len = rng.random_range(10..=18usize);
            let mut tokens = Vec::with_capacity(len);
            let mut labels = Vec::with_capacity(len);
            while tokens.len() < len {
                let room = len - tokens.len();
                if room >= 3 && rng.random_bool(0.2) {
                    let entity_len = if room >= 4 && rng.random_bool(0.5) { 2 } else { 1 };
                    let (trigger, kind) = if rng.random_bool(0.5) {
                        (TRIGGER_PER, "PER")
                    } else {
                        (TRIGGER_LOC, "LOC")
                    };
                    tokens.push(trigger);
                    labels.push(Tag::Outside);
                    for j in 0..entity_len {
                        tokens.push(filler(&mut rng));
                        labels.push(if j == 0 {
                            Tag::Begin(kind.into())
                        } else {
                            Tag::Inside(kind.into())
                        });
                    }
                    tokens.push(CLOSE);
                    labels.push(Tag::Outside);
                } else {
                    tokens.push(filler(&mut rng));
                    labels.push(Tag::Outside);
                }
            }
            TagSequence { tokens, labels }
        })
        .collect()
}

/// One-hot window features, one row per token: `[tokens, (2r+1) * VOCAB]`.
pub fn window_features(seqs: &[TagSequence]) -> Result<Tensor> {
    let width = (2 * WINDOW_RADIUS + 1) * VOCAB as usize;
    let rows: usize = seqs.iter().map(TagSequence::len).sum();
    if rows == 0 {
        return Err(Error::Shape("no tokens to featurize".into()));
    }
    let mut data = vec![0.0; rows * width];
    let mut r = 0;
    for seq in seqs {
        for i in 0..seq.len() {
            for w in 0..=2 * WINDOW_RADIUS {
                let pos = i as isize + w as isize - WINDOW_RADIUS as isize;
                let tok = if pos < 0 || pos as usize >= seq.len() {
                    PAD
                } else {
                    seq.tokens[pos as usize]
                };
                if tok >= VOCAB {
                    return Err(Error::Domain(format!(
                        "token {tok} outside the {VOCAB}-symbol alphabet"
                    )));
                }
                data[r * width + w * VOCAB as usize + tok as usize] = 1.0;
            }
            r += 1;
        }
    }
    Tensor::new(vec![rows, width], data)
}

pub fn write_regression(mut w: impl Write, samples: &[RegressionSample]) -> Result<()> {
    writeln!(w, "x1,x2,target")?;
    for s in samples {
        writeln!(w, "{},{},{}", fmt17(s.x[0]), fmt17(s.x[1]), fmt17(s.target))?;
    }
    Ok(())
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn read_regression(r: impl BufRead) -> Result<Vec<RegressionSample>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line == "x1,x2,target" {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| parse_err(i + 1, format!("bad number `{f}`")))
            })
            .collect::<Result<_>>()?;
        let [x1, x2, target] = fields[..] else {
            return Err(parse_err(i + 1, "expected 3 fields"));
        };
        out.push(RegressionSample { x: [x1, x2], target });
    }
    Ok(out)
}

/// CoNLL-style `token<TAB>label` lines, blank line between sequences.
pub fn write_tagging(mut w: impl Write, seqs: &[TagSequence]) -> Result<()> {
    for (n, seq) in seqs.iter().enumerate() {
        if n > 0 {
            writeln!(w)?;
        }
        for (tok, tag) in seq.tokens.iter().zip(&seq.labels) {
            writeln!(w, "{tok}\t{tag}")?;
        }
    }
    Ok(())
}

pub fn read_tagging(r: impl BufRead) -> Result<Vec<TagSequence>> {
    let mut out = Vec::new();
    let mut cur = TagSequence {
        tokens: vec![],
        labels: vec![],
    };
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            if !cur.is_empty() {
                out.push(std::mem::replace(
                    &mut cur,
                    TagSequence {
                        tokens: vec![],
                        labels: vec![],
                    },
                ));
            }
            continue;
        }
        let (tok, tag) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(i + 1, "expected token<TAB>label"))?;
        cur.tokens.push(
            tok.parse()
                .map_err(|_| parse_err(i + 1, format!("bad token `{tok}`")))?,
        );
        cur.labels
            .push(tag.trim().parse().map_err(|e: Error| parse_err(i + 1, e.to_string()))?);
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regression_is_deterministic_and_bounded() {
        let a = gen_regression_task(7, 1000);
        assert_eq!(a.len(), 1000);
        assert_eq!(a, gen_regression_task(7, 1000));
        assert_ne!(a, gen_regression_task(8, 1000));
        for s in &a {
            assert!(s.x.iter().all(|v| (-2.0..=2.0).contains(v)));
            assert!(s.target.is_finite() && (-3.0..=3.0).contains(&s.target));
            assert!((-1.0..=3.0).contains(&s.target));
        }
    }

    #[test]
    fn tagging_is_deterministic_and_well_formed() {
        let a = gen_toy_tagging_task(11, 300);
        assert_eq!(a, gen_toy_tagging_task(11, 300));
        assert!(a.iter().all(|s| s.is_well_formed()));
        let total: usize = a.iter().map(|s| s.len()).sum();
        let entity: usize = a.iter().flat_map(|s| &s.labels).filter(|t| **t != Tag::Outside).count();
        let frac = entity as f64 / total as f64;
        assert!((0.05..=0.40).contains(&frac), "entity fraction {frac}");
        let begins = a
            .iter()
            .flat_map(|s| &s.labels)
            .filter(|t| matches!(t, Tag::Begin(_)))
            .count();
        let insides = entity - begins;
        assert!(begins > 0 && insides > 0);
    }

    #[test]
    fn window_features_shape() {
        let seqs = gen_toy_tagging_task(1, 3);
        let x = window_features(&seqs).unwrap();
        let n: usize = seqs.iter().map(|s| s.len()).sum();
        assert_eq!(x.shape(), &[n, 5 * VOCAB as usize]);
        for r in 0..n {
            assert_eq!(x.row(r).iter().sum::<f64>(), 5.0);
        }
    }

    #[test]
    fn text_formats_round_trip() {
        let reg = gen_regression_task(3, 20);
        let mut buf = Vec::new();
        write_regression(&mut buf, &reg).unwrap();
        assert_eq!(read_regression(&buf[..]).unwrap(), reg);

        let tag = gen_toy_tagging_task(3, 5);
        let mut buf = Vec::new();
        write_tagging(&mut buf, &tag).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.split("\n\n").count(), 5);
        assert_eq!(read_tagging(&buf[..]).unwrap(), tag);
    }

    #[test]
    fn malformed_input_reports_line() {
        let err = read_regression("x1,x2,target\n1,2,3\n1,oops,3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = read_tagging("4\tO\n5 O\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }
}
