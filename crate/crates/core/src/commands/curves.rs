//! `kdac-kit curves`: `x,y,dy_dx` samples of each selected activation.

use std::path::{Path, PathBuf};

use super::config::RunConfig;
use super::write_output;
use crate::activations::ActivationKind;
use crate::error::Result;
use crate::kdac::{find_breakpoints, linspace, sample_curve, Breakpoints, CurveSample};
use crate::numfmt::fmt17;

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub activation: ActivationKind,
    pub samples: Vec<CurveSample>,
    /// KDAC only.
    pub breakpoints: Option<Breakpoints>,
    /// Where the CSV was written, if anywhere.
    pub path: Option<PathBuf>,
}

impl Curve {
    pub fn render(&self, cfg: &RunConfig) -> String {
        let mut s = cfg.header_comment();
        s.push_str(&format!("# activation = {}\n", self.activation));
        if let Some(b) = &self.breakpoints {
            let show = |v: Option<f64>| v.map_or_else(|| "none".to_string(), fmt17);
            s.push_str(&format!("# breakpoints k={} t={}\n", show(b.k), show(b.t)));
        }
        s.push_str("x,y,dy_dx\n");
        for p in &self.samples {
            s.push_str(&format!("{},{},{}\n", fmt17(p.x), fmt17(p.y), fmt17(p.dy_dx)));
        }
        s
    }
}

pub fn curve_for(kind: &ActivationKind, cfg: &RunConfig) -> Result<Curve> {
    kind.validate()?;
    let (samples, breakpoints) = match *kind {
        ActivationKind::Kdac { beta1, beta2, mu } => (
            sample_curve(beta1, beta2, mu, cfg.curve_min, cfg.curve_max, cfg.curve_steps)?,
            Some(find_breakpoints(beta1, beta2)?),
        ),
        k => (
            linspace(cfg.curve_min, cfg.curve_max, cfg.curve_steps)?
                .into_iter()
                .map(|x| CurveSample {
                    x,
                    y: k.value(x),
                    dy_dx: k.derivative(x),
                })
                .collect(),
            None,
        ),
    };
    Ok(Curve {
        activation: *kind,
        samples,
        breakpoints,
        path: None,
    })
}

/// Output file for curve `index` of `count`: the path itself for a single
/// curve, otherwise `<stem>_<index>_<tag>.<ext>` beside it.
pub fn curve_path(out: &Path, index: usize, count: usize, kind: &ActivationKind) -> PathBuf {
    if count == 1 {
        return out.to_path_buf();
    }
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("curve");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    out.with_file_name(format!("{stem}_{index}_{}.{ext}", kind.tag()))
}

/// Samples every selected activation; with `cfg.out` set, writes one CSV per curve.
pub fn run_curves(cfg: &RunConfig) -> Result<Vec<Curve>> {
    let n = cfg.activations.len();
    let mut curves = Vec::with_capacity(n);
    for (i, kind) in cfg.activations.iter().enumerate() {
        let mut c = curve_for(kind, cfg)?;
        if let Some(out) = &cfg.out {
            let path = curve_path(out, i, n, kind);
            write_output(&path, &c.render(cfg))?;
            c.path = Some(path);
        }
        curves.push(c);
    }
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commands::config::{resolve, Command, Overrides};

    #[test]
    fn three_mu_files() {
        let dir = tempfile::tempdir().unwrap();
        let flags = Overrides {
            beta1: Some(0.8),
            beta2: Some(0.5),
            mu: Some("0.0001,0.01,0.5".into()),
            out: Some(dir.path().join("mu.csv")),
            ..Default::default()
        };
        let cfg = resolve(Command::Curves, None, &flags).unwrap();
        let curves = run_curves(&cfg).unwrap();
        assert_eq!(curves.len(), 3);
        for c in &curves {
            let text = std::fs::read_to_string(c.path.as_ref().unwrap()).unwrap();
            assert!(text.contains("# breakpoints k="));
            assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 1001);
            assert_eq!(RunConfig::from_output_header(&text).unwrap(), cfg);
        }
    }

    #[test]
    fn non_kdac_curve() {
        let mut cfg = RunConfig::defaults(Command::Curves);
        cfg.activations = vec![ActivationKind::Relu];
        cfg.curve_steps = 3;
        let c = run_curves(&cfg).unwrap().remove(0);
        assert!(c.breakpoints.is_none());
        assert_eq!(c.samples.iter().map(|s| s.y).collect::<Vec<_>>(), [0.0, 0.0, 5.0]);
        assert!(!c.render(&cfg).contains("breakpoints"));
    }
}
