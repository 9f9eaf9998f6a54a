//! Scalar activation functions with first derivatives, behind one tagged
//! descriptor.
//!
//! Piecewise definitions use closed-right intervals: for LiSA and RSigELUD
//! `x >= 1` takes the upper branch, `0 <= x < 1` the middle one and `x < 0`
//! the lower one. RSigELUD is discontinuous at `x = 1` and that jump is kept.
//! Wherever a function has a kink the derivative reported is the right
//! limit.

use std::fmt;
use std::str::FromStr;

use crate::error::{config, Error, Result};
use crate::kdac;
use crate::numfmt::fmt17;
use crate::smooth::Clamp;

pub const LEAKY_RELU_ALPHA: f64 = 0.01;
pub const SELU_LAMBDA: f64 = 1.0507009873554805;
pub const SELU_ALPHA: f64 = 1.6732632423543772;
pub const LISA_ALPHA1: f64 = 0.25;
pub const LISA_ALPHA2: f64 = 0.15;
pub const RSIGELUD_ALPHA: f64 = 0.05;
pub const RSIGELUD_BETA: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActivationKind {
    Tanh,
    Sigmoid,
    Relu,
    LeakyRelu { alpha: f64 },
    Selu { lambda: f64, alpha: f64 },
    Swish,
    Lisa { alpha1: f64, alpha2: f64 },
    RSigElud { alpha: f64, beta: f64 },
    Kdac { beta1: f64, beta2: f64, mu: f64 },
}

/// Lowercase tags in registry order.
pub const TAGS: [&str; 9] = [
    "tanh",
    "sigmoid",
    "relu",
    "leaky_relu",
    "selu",
    "swish",
    "lisa",
    "rsigelud",
    "kdac",
];

/// All nine activations with their default hyperparameters.
pub fn list_registry() -> Vec<ActivationKind> {
    TAGS.iter()
        .map(|t| ActivationKind::default_for(t).expect("registry tags are known"))
        .collect()
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// A derivative together with whether `x` sits exactly on a kink, where
/// the right-limit value was substituted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeSample {
    pub value: f64,
    pub at_breakpoint: bool,
}

impl ActivationKind {
    pub fn default_for(tag: &str) -> Result<Self> {
        use ActivationKind::*;
        Ok(match tag {
            "tanh" => Tanh,
            "sigmoid" => Sigmoid,
            "relu" => Relu,
            "leaky_relu" => LeakyRelu {
                alpha: LEAKY_RELU_ALPHA,
            },
            "selu" => Selu {
                lambda: SELU_LAMBDA,
                alpha: SELU_ALPHA,
            },
            "swish" => Swish,
            "lisa" => Lisa {
                alpha1: LISA_ALPHA1,
                alpha2: LISA_ALPHA2,
            },
            "rsigelud" => RSigElud {
                alpha: RSIGELUD_ALPHA,
                beta: RSIGELUD_BETA,
            },
            "kdac" => Kdac {
                beta1: kdac::DEFAULT_BETA1,
                beta2: kdac::DEFAULT_BETA2,
                mu: kdac::DEFAULT_MU,
            },
            other => return config(format!("unknown activation tag `{other}`")),
        })
    }

    pub fn tag(&self) -> &'static str {
        use ActivationKind::*;
        match self {
            Tanh => "tanh",
            Sigmoid => "sigmoid",
            Relu => "relu",
            LeakyRelu { .. } => "leaky_relu",
            Selu { .. } => "selu",
            Swish => "swish",
            Lisa { .. } => "lisa",
            RSigElud { .. } => "rsigelud",
            Kdac { .. } => "kdac",
        }
    }

    /// Hyperparameter names this tag requires, in canonical order.
    pub fn param_names(tag: &str) -> Result<&'static [&'static str]> {
        Ok(match tag {
            "tanh" | "sigmoid" | "relu" | "swish" => &[],
            "leaky_relu" => &["alpha"],
            "selu" => &["lambda", "alpha"],
            "lisa" => &["alpha1", "alpha2"],
            "rsigelud" => &["alpha", "beta"],
            "kdac" => &["beta1", "beta2", "mu"],
            other => return config(format!("unknown activation tag `{other}`")),
        })
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        use ActivationKind::*;
        match *self {
            Tanh | Sigmoid | Relu | Swish => vec![],
            LeakyRelu { alpha } => vec![("alpha", alpha)],
            Selu { lambda, alpha } => vec![("lambda", lambda), ("alpha", alpha)],
            Lisa { alpha1, alpha2 } => vec![("alpha1", alpha1), ("alpha2", alpha2)],
            RSigElud { alpha, beta } => vec![("alpha", alpha), ("beta", beta)],
            Kdac { beta1, beta2, mu } => vec![("beta1", beta1), ("beta2", beta2), ("mu", mu)],
        }
    }

    /// Builds a kind from a tag and an explicit parameter list. Every
    /// parameter the tag needs must be given exactly once.
    pub fn from_parts(tag: &str, given: &[(String, f64)]) -> Result<Self> {
        let names = Self::param_names(tag)?;
        for (name, _) in given {
            if !names.contains(&name.as_str()) {
                return config(format!("activation `{tag}` has no parameter `{name}`"));
            }
            if given.iter().filter(|(n, _)| n == name).count() > 1 {
                return config(format!("parameter `{name}` given twice for `{tag}`"));
            }
        }
        let get = |name: &str| -> Result<f64> {
            given
                .iter()
                .find(|(n, _)| n == name)
                .map(|&(_, v)| v)
                .ok_or_else(|| Error::Config(format!("activation `{tag}` is missing parameter `{name}`")))
        };
        use ActivationKind::*;
        let kind = match tag {
            "tanh" => Tanh,
            "sigmoid" => Sigmoid,
            "relu" => Relu,
            "swish" => Swish,
            "leaky_relu" => LeakyRelu { alpha: get("alpha")? },
            "selu" => Selu {
                lambda: get("lambda")?,
                alpha: get("alpha")?,
            },
            "lisa" => Lisa {
                alpha1: get("alpha1")?,
                alpha2: get("alpha2")?,
            },
            "rsigelud" => RSigElud {
                alpha: get("alpha")?,
                beta: get("beta")?,
            },
            "kdac" => Kdac {
                beta1: get("beta1")?,
                beta2: get("beta2")?,
                mu: get("mu")?,
            },
            _ => unreachable!("tag checked by param_names"),
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.params() {
            if !v.is_finite() {
                return config(format!("{}: parameter `{name}` must be finite, got {v}", self.tag()));
            }
        }
        if let ActivationKind::Kdac { beta1, beta2, mu } = *self {
            if !(beta1 > 0.0 && beta2 > 0.0 && mu > 0.0) {
                return config(format!(
                    "kdac: beta1, beta2 and mu must be > 0, got {beta1}, {beta2}, {mu}"
                ));
            }
        }
        Ok(())
    }

    /// Function value without validation; `self` must be valid.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        use ActivationKind::*;
        match *self {
            Tanh => x.tanh(),
            Sigmoid => sigmoid(x),
            Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            LeakyRelu { alpha } => {
                if x > 0.0 {
                    x
                } else {
                    alpha * x
                }
            }
            Selu { lambda, alpha } => {
                if x > 0.0 {
                    lambda * x
                } else {
                    lambda * alpha * x.exp_m1()
                }
            }
            Swish => x * sigmoid(x),
            Lisa { alpha1, alpha2 } => {
                if x >= 1.0 {
                    alpha1 * x - alpha1 + 1.0
                } else if x >= 0.0 {
                    x
                } else {
                    alpha2 * x
                }
            }
            RSigElud { alpha, beta } => {
                if x >= 1.0 {
                    alpha * x * sigmoid(x) + x
                } else if x >= 0.0 {
                    x
                } else {
                    beta * x.exp_m1()
                }
            }
            Kdac { beta1, beta2, mu } => kdac::trace_unchecked(x, beta1, beta2, mu).y,
        }
    }

    /// First derivative (right limit at kinks) without validation.
    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        use ActivationKind::*;
        match *self {
            Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            Relu => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            LeakyRelu { alpha } => {
                if x >= 0.0 {
                    1.0
                } else {
                    alpha
                }
            }
            Selu { lambda, alpha } => {
                if x >= 0.0 {
                    lambda
                } else {
                    lambda * alpha * x.exp()
                }
            }
            Swish => {
                let s = sigmoid(x);
                s + x * s * (1.0 - s)
            }
            Lisa { alpha1, alpha2 } => {
                if x >= 1.0 {
                    alpha1
                } else if x >= 0.0 {
                    1.0
                } else {
                    alpha2
                }
            }
            RSigElud { alpha, beta } => {
                if x >= 1.0 {
                    let s = sigmoid(x);
                    alpha * (s + x * s * (1.0 - s)) + 1.0
                } else if x >= 0.0 {
                    1.0
                } else {
                    beta * x.exp()
                }
            }
            Kdac { beta1, beta2, mu } => {
                let t = kdac::trace_unchecked(x, beta1, beta2, mu);
                kdac::gradients_from_trace(x, beta1, beta2, &t).d_x
            }
        }
    }

    /// The bare tag when every hyperparameter is at its default, otherwise
    /// the full selector.
    pub fn label(&self) -> String {
        match Self::default_for(self.tag()) {
            Ok(d) if d == *self => self.tag().to_string(),
            _ => self.to_string(),
        }
    }

    /// Points where the function is not differentiable. KDAC has none; its
    /// band edges are reported through [`ActivationKind::regime`] instead.
    pub fn breakpoints(&self) -> &'static [f64] {
        use ActivationKind::*;
        match self {
            Relu | LeakyRelu { .. } | Selu { .. } => &[0.0],
            Lisa { .. } | RSigElud { .. } => &[0.0, 1.0],
            _ => &[],
        }
    }

    /// Index of the smooth piece containing `x`. Finite-difference stencils
    /// that stay inside one piece see an infinitely differentiable function.
    pub fn regime(&self, x: f64) -> u32 {
        match *self {
            ActivationKind::Kdac { beta1, beta2, mu } => {
                let (inner, outer) = kdac::trace_unchecked(x, beta1, beta2, mu).regime();
                let code = |c: Clamp| match c {
                    Clamp::Below => 0,
                    Clamp::Inside => 1,
                    Clamp::Above => 2,
                };
                3 * code(inner) + code(outer)
            }
            _ => self.breakpoints().iter().filter(|&&b| x >= b).count() as u32,
        }
    }
}

impl fmt::Display for ActivationKind {
    /// Selector form, e.g. `lisa:alpha1=2.5000000000000000e-1,alpha2=...`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())?;
        let params = self.params();
        if !params.is_empty() {
            let joined: Vec<String> = params.iter().map(|(n, v)| format!("{n}={}", fmt17(*v))).collect();
            write!(f, ":{}", joined.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    /// Parses `tag` (default hyperparameters) or `tag:name=value,...` (all
    /// hyperparameters explicit).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (tag, rest) = match s.split_once(':') {
            Some((t, r)) => (t.trim(), Some(r)),
            None => (s, None),
        };
        let Some(rest) = rest else {
            return Self::default_for(tag);
        };
        let mut given = Vec::new();
        for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected name=value in `{pair}`")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("`{value}` is not a number (in `{s}`)")))?;
            given.push((name.trim().to_string(), value));
        }
        Self::from_parts(tag, &given)
    }
}

fn check_input(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("activation input must be finite, got {x}")))
    }
}

pub fn eval_activation(kind: &ActivationKind, x: f64) -> Result<f64> {
    kind.validate()?;
    check_input(x)?;
    Ok(kind.value(x))
}

pub fn eval_activation_derivative(kind: &ActivationKind, x: f64) -> Result<f64> {
    derivative_sample(kind, x).map(|d| d.value)
}

pub fn derivative_sample(kind: &ActivationKind, x: f64) -> Result<DerivativeSample> {
    kind.validate()?;
    check_input(x)?;
    Ok(DerivativeSample {
        value: kind.derivative(x),
        at_breakpoint: kind.breakpoints().contains(&x),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ActivationKind::*;

    fn kind(tag: &str) -> ActivationKind {
        ActivationKind::default_for(tag).unwrap()
    }

    #[test]
    fn spot_values() {
        assert_eq!(eval_activation(&Tanh, 0.0).unwrap(), 0.0);
        assert_eq!(eval_activation(&Sigmoid, 0.0).unwrap(), 0.5);
        assert_eq!(eval_activation(&Swish, 0.0).unwrap(), 0.0);
        // x > 1 branch: 0.25 * 2 - 0.25 + 1
        assert!((eval_activation(&kind("lisa"), 2.0).unwrap() - 1.25).abs() < 1e-15);
        let expected = 0.2 * ((-1f64).exp() - 1.0);
        let got = eval_activation(&kind("rsigelud"), -1.0).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got + 0.1264241).abs() < 1e-7);
    }

    #[test]
    fn spot_derivatives() {
        assert_eq!(eval_activation_derivative(&Tanh, 0.0).unwrap(), 1.0);
        assert_eq!(eval_activation_derivative(&Relu, 3.0).unwrap(), 1.0);
        let d = eval_activation_derivative(&Sigmoid, 0.0).unwrap();
        let h = 1e-6;
        let fd = (sigmoid(h) - sigmoid(-h)) / (2.0 * h);
        assert_eq!(d, 0.25);
        assert!((d - fd).abs() < 1e-9);
    }

    #[test]
    fn kinks_report_right_limit_and_flag() {
        let d = derivative_sample(&Relu, 0.0).unwrap();
        assert_eq!(
            d,
            DerivativeSample {
                value: 1.0,
                at_breakpoint: true
            }
        );
        let lisa = kind("lisa");
        assert_eq!(derivative_sample(&lisa, 1.0).unwrap().value, LISA_ALPHA1);
        assert!(derivative_sample(&lisa, 1.0).unwrap().at_breakpoint);
        assert!(!derivative_sample(&lisa, 0.5).unwrap().at_breakpoint);
        assert_eq!(derivative_sample(&kind("leaky_relu"), 0.0).unwrap().value, 1.0);
        assert_eq!(derivative_sample(&kind("selu"), 0.0).unwrap().value, SELU_LAMBDA);
    }

    #[test]
    fn rsigelud_keeps_jump_at_one() {
        let r = kind("rsigelud");
        let left = r.value(1.0 - 1e-12);
        let right = r.value(1.0);
        assert!((left - 1.0).abs() < 1e-11);
        assert!((right - (RSIGELUD_ALPHA * sigmoid(1.0) + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn registry_contents() {
        let reg = list_registry();
        assert_eq!(reg.len(), 9);
        assert!(reg.contains(&Lisa {
            alpha1: 0.25,
            alpha2: 0.15
        }));
        assert!(reg.contains(&RSigElud { alpha: 0.05, beta: 0.2 }));
        let tags: Vec<_> = reg.iter().map(|k| k.tag()).collect();
        assert_eq!(tags, TAGS);
    }

    #[test]
    fn selector_parsing() {
        let k: ActivationKind = "lisa:alpha1=0.25,alpha2=0.15".parse().unwrap();
        assert_eq!(
            k,
            Lisa {
                alpha1: 0.25,
                alpha2: 0.15
            }
        );
        assert_eq!("relu".parse::<ActivationKind>().unwrap(), Relu);
        assert_eq!("kdac".parse::<ActivationKind>().unwrap(), kind("kdac"));
        for k in list_registry() {
            assert_eq!(k.to_string().parse::<ActivationKind>().unwrap(), k);
        }
    }

    #[test]
    fn selector_errors() {
        let err = "lisa:alpha1=0.25".parse::<ActivationKind>().unwrap_err();
        assert!(err.to_string().contains("alpha2"), "{err}");
        assert!("gelu".parse::<ActivationKind>().is_err());
        assert!("relu:alpha=1".parse::<ActivationKind>().is_err());
        assert!("kdac:beta1=1,beta2=0.5,mu=0".parse::<ActivationKind>().is_err());
        assert!("leaky_relu:alpha=inf".parse::<ActivationKind>().is_err());
        assert!("leaky_relu:alpha=x".parse::<ActivationKind>().is_err());
    }

    #[test]
    fn non_finite_input_is_domain_error() {
        assert!(matches!(eval_activation(&Tanh, f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(
            eval_activation_derivative(&Relu, f64::INFINITY),
            Err(Error::Domain(_))
        ));
        let bad = Kdac {
            beta1: -1.0,
            beta2: 1.0,
            mu: 0.01,
        };
        assert!(matches!(eval_activation(&bad, 0.0), Err(Error::Config(_))));
    }

    #[test]
    fn regimes_split_at_breakpoints() {
        let l = kind("lisa");
        assert_eq!(l.regime(-0.5), 0);
        assert_eq!(l.regime(0.0), 1);
        assert_eq!(l.regime(1.5), 2);
        assert_eq!(Tanh.regime(3.0), 0);
        let k = kind("kdac");
        assert_ne!(k.regime(0.0), k.regime(10.0));
    }
}
