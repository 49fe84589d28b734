//! Catalog of one-variable wave profiles `F(xi)` with analytic derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Number of derivatives (including the value) every profile provides.
pub const PROFILE_DERIVS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayClass {
    Compact,
    Exponential,
    InversePower,
    /// `F'` does not decay.
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum WaveProfile {
    /// `A·sech(xi − shift)`.
    Sech {
        amplitude: f64,
        #[serde(default)]
        shift: f64,
    },
    /// `A·exp(−(xi − center)²/width²)`.
    Gaussian {
        amplitude: f64,
        #[serde(default)]
        center: f64,
        width: f64,
    },
    /// `A·(2 + xi)^(−power)`; singular at `xi = −2`.
    InvPower { amplitude: f64, power: f64 },
    /// `A·exp(−1/(1 − z²))`, `z = (xi − center)/radius`, zero for `|z| >= 1`.
    Bump {
        amplitude: f64,
        #[serde(default)]
        center: f64,
        radius: f64,
    },
    Cos { amplitude: f64 },
    Sin { amplitude: f64 },
    Constant { value: f64 },
    Zero,
    /// `slope·xi`, so `F' ≡ slope`.
    Linear { slope: f64 },
    /// `A·xi²/2`, so `F' = A·xi`.
    Quadratic { amplitude: f64 },
    /// `(2 + xi)·log(2 + xi) − (2 + xi)`, so `F' = log(2 + xi)`.
    LogSlope,
}

impl WaveProfile {
    /// Looks up a profile by catalog name. Missing parameters take the
    /// defaults `amplitude = 1`, `power = 1`, `width = radius = 1`, offsets 0.
    pub fn from_name(name: &str, params: &[(String, f64)]) -> Result<Self> {
        let get = |key: &str, default: f64| {
            params
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| *v)
                .unwrap_or(default)
        };
        let amplitude = get("amplitude", 1.0);
        Ok(match name {
            "sech" => WaveProfile::Sech {
                amplitude,
                shift: get("shift", 0.0),
            },
            "gaussian" => WaveProfile::Gaussian {
                amplitude,
                center: get("center", 0.0),
                width: get("width", 1.0),
            },
            "inv_power" => WaveProfile::InvPower {
                amplitude,
                power: get("power", 1.0),
            },
            "bump" => WaveProfile::Bump {
                amplitude,
                center: get("center", 0.0),
                radius: get("radius", 1.0),
            },
            "cos" => WaveProfile::Cos { amplitude },
            "sin" => WaveProfile::Sin { amplitude },
            "constant" => WaveProfile::Constant {
                value: get("value", 1.0),
            },
            "zero" => WaveProfile::Zero,
            "linear" => WaveProfile::Linear {
                slope: get("slope", 1.0),
            },
            "quadratic" => WaveProfile::Quadratic { amplitude },
            "log_slope" => WaveProfile::LogSlope,
            other => return Err(Error::UnknownProfile(other.to_string())),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            WaveProfile::Sech { .. } => "sech",
            WaveProfile::Gaussian { .. } => "gaussian",
            WaveProfile::InvPower { .. } => "inv_power",
            WaveProfile::Bump { .. } => "bump",
            WaveProfile::Cos { .. } => "cos",
            WaveProfile::Sin { .. } => "sin",
            WaveProfile::Constant { .. } => "constant",
            WaveProfile::Zero => "zero",
            WaveProfile::Linear { .. } => "linear",
            WaveProfile::Quadratic { .. } => "quadratic",
            WaveProfile::LogSlope => "log_slope",
        }
    }

    pub fn decay_class(&self) -> DecayClass {
        match self {
            WaveProfile::Sech { .. } | WaveProfile::Gaussian { .. } => DecayClass::Exponential,
            WaveProfile::InvPower { .. } => DecayClass::InversePower,
            WaveProfile::Bump { .. } | WaveProfile::Constant { .. } | WaveProfile::Zero => {
                DecayClass::Compact
            }
            _ => DecayClass::None,
        }
    }

    /// Infimum of the open interval on which the profile is smooth.
    pub fn domain_min(&self) -> f64 {
        match self {
            WaveProfile::InvPower { .. } | WaveProfile::LogSlope => -2.0,
            _ => f64::NEG_INFINITY,
        }
    }

    /// `[F, F', F'', F''', F'''']` at `xi`.
    pub fn derivs(&self, xi: f64) -> [f64; PROFILE_DERIVS] {
        let n = PROFILE_DERIVS - 1;
        match *self {
            WaveProfile::Sech { amplitude, shift } => {
                let x = xi - shift;
                let (c, s) = (x.cosh(), x.sinh());
                let cosh = Jet::variable(n, 0, x).compose(&[c, s, c, s, c]);
                scaled(from_1d(&cosh.compose(&reciprocal(c))), amplitude)
            }
            WaveProfile::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let z = (xi - center) / width;
                let arg = Jet::variable(n, 0, z);
                let e = (-&(&arg * &arg)).compose(&[(-z * z).exp(); PROFILE_DERIVS]);
                chain_scale(from_1d(&e), amplitude, 1.0 / width)
            }
            WaveProfile::InvPower { amplitude, power } => {
                let base = 2.0 + xi;
                let mut out = [0.0; PROFILE_DERIVS];
                let mut coef = amplitude;
                for (k, o) in out.iter_mut().enumerate() {
                    *o = coef * base.powf(-power - k as f64);
                    coef *= -(power + k as f64);
                }
                out
            }
            WaveProfile::Bump {
                amplitude,
                center,
                radius,
            } => {
                let z = (xi - center) / radius;
                if z.abs() >= 1.0 {
                    return [0.0; PROFILE_DERIVS];
                }
                let zj = Jet::variable(n, 0, z);
                let q = &Jet::constant(n, 1.0) - &(&zj * &zj);
                let inv_q = q.compose(&reciprocal(q.value()));
                let e = (-&inv_q).compose(&[(-inv_q.value()).exp(); PROFILE_DERIVS]);
                chain_scale(from_1d(&e), amplitude, 1.0 / radius)
            }
            WaveProfile::Cos { amplitude } => {
                let (c, s) = (xi.cos(), xi.sin());
                scaled([c, -s, -c, s, c], amplitude)
            }
            WaveProfile::Sin { amplitude } => {
                let (c, s) = (xi.cos(), xi.sin());
                scaled([s, c, -s, -c, s], amplitude)
            }
            WaveProfile::Constant { value } => [value, 0.0, 0.0, 0.0, 0.0],
            WaveProfile::Zero => [0.0; PROFILE_DERIVS],
            WaveProfile::Linear { slope } => [slope * xi, slope, 0.0, 0.0, 0.0],
            WaveProfile::Quadratic { amplitude } => {
                [0.5 * amplitude * xi * xi, amplitude * xi, amplitude, 0.0, 0.0]
            }
            WaveProfile::LogSlope => {
                let b = 2.0 + xi;
                let l = b.ln();
                [b * l - b, l, 1.0 / b, -1.0 / (b * b), 2.0 / (b * b * b)]
            }
        }
    }

    pub fn eval(&self, xi: f64) -> f64 {
        match *self {
            WaveProfile::Sech { amplitude, shift } => amplitude / (xi - shift).cosh(),
            WaveProfile::Gaussian {
                amplitude,
                center,
                width,
            } => amplitude * (-((xi - center) / width).powi(2)).exp(),
            WaveProfile::InvPower { amplitude, power } => amplitude * (2.0 + xi).powf(-power),
            _ => self.derivs(xi)[0],
        }
    }

    pub fn d1(&self, xi: f64) -> f64 {
        self.derivs(xi)[1]
    }

    pub fn d2(&self, xi: f64) -> f64 {
        self.derivs(xi)[2]
    }

    pub fn d3(&self, xi: f64) -> f64 {
        self.derivs(xi)[3]
    }

    pub fn d4(&self, xi: f64) -> f64 {
        self.derivs(xi)[4]
    }

    /// `F(inner)` as a jet, for an inner jet of order at most 4.
    pub fn compose(&self, inner: &Jet) -> Jet {
        inner.compose(&self.derivs(inner.value()))
    }
}

/// `1/x` and its first four derivatives at `x`.
fn reciprocal(x: f64) -> [f64; PROFILE_DERIVS] {
    let mut out = [0.0; PROFILE_DERIVS];
    let mut coef = 1.0;
    for (k, o) in out.iter_mut().enumerate() {
        *o = coef / x.powi(k as i32 + 1);
        coef *= -(k as f64 + 1.0);
    }
    out
}

fn from_1d(j: &Jet) -> [f64; PROFILE_DERIVS] {
    let mut out = [0.0; PROFILE_DERIVS];
    for (k, o) in out.iter_mut().enumerate() {
        *o = j.partial([k as u8, 0, 0]);
    }
    out
}

fn scaled(mut d: [f64; PROFILE_DERIVS], s: f64) -> [f64; PROFILE_DERIVS] {
    for x in d.iter_mut() {
        *x *= s;
    }
    d
}

/// Derivatives of `A·g(k·xi)` from those of `g`.
fn chain_scale(mut d: [f64; PROFILE_DERIVS], amplitude: f64, k: f64) -> [f64; PROFILE_DERIVS] {
    let mut f = amplitude;
    for x in d.iter_mut() {
        *x *= f;
        f *= k;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> Vec<WaveProfile> {
        vec![
            WaveProfile::Sech {
                amplitude: 0.7,
                shift: 0.3,
            },
            WaveProfile::Gaussian {
                amplitude: -1.2,
                center: 0.4,
                width: 0.8,
            },
            WaveProfile::InvPower {
                amplitude: 1.5,
                power: 1.0,
            },
            WaveProfile::InvPower {
                amplitude: -1.0,
                power: 2.5,
            },
            WaveProfile::Bump {
                amplitude: 2.0,
                center: 0.5,
                radius: 1.5,
            },
            WaveProfile::Cos { amplitude: 1.0 },
            WaveProfile::Sin { amplitude: 0.5 },
            WaveProfile::Linear { slope: 2.0 },
            WaveProfile::Quadratic { amplitude: 3.0 },
            WaveProfile::LogSlope,
        ]
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 2e-4;
        for p in catalog() {
            for k in 0..=20 {
                let xi = -0.9 + 0.13 * k as f64;
                let d = p.derivs(xi);
                assert!((p.eval(xi) - d[0]).abs() < 1e-14 * (1.0 + d[0].abs()));
                for order in 1..PROFILE_DERIVS {
                    let g = |x: f64| p.derivs(x)[order - 1];
                    // fourth-order central difference of the previous derivative
                    let fd = (g(xi - 2.0 * h) - 8.0 * g(xi - h) + 8.0 * g(xi + h) - g(xi + 2.0 * h))
                        / (12.0 * h);
                    assert!(
                        (fd - d[order]).abs() < 1e-6 * (1.0 + d[order].abs()),
                        "{} order {order} at {xi}: {fd} vs {}",
                        p.name(),
                        d[order]
                    );
                }
            }
        }
    }

    #[test]
    fn closed_form_values() {
        let s = WaveProfile::Sech {
            amplitude: 1.0,
            shift: 0.0,
        };
        assert_eq!(s.eval(0.0), 1.0);
        assert!((s.d2(0.0) + 1.0).abs() < 1e-15);
        let b = WaveProfile::Bump {
            amplitude: 1.0,
            center: 0.0,
            radius: 1.0,
        };
        assert!((b.eval(0.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(b.derivs(1.0), [0.0; PROFILE_DERIVS]);
        let p = WaveProfile::InvPower {
            amplitude: 1.0,
            power: 1.0,
        };
        assert_eq!(p.derivs(0.0), [0.5, -0.25, 0.25, -0.375, 0.75]);
    }

    #[test]
    fn names_round_trip() {
        for p in catalog() {
            let q = WaveProfile::from_name(p.name(), &[]).unwrap();
            assert_eq!(q.name(), p.name());
        }
        assert!(matches!(
            WaveProfile::from_name("nope", &[]),
            Err(Error::UnknownProfile(_))
        ));
    }

    #[test]
    fn serde_uses_the_catalog_name() {
        let p = WaveProfile::Sech {
            amplitude: 0.5,
            shift: 0.0,
        };
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"name\":\"sech\""), "{s}");
        let q: WaveProfile = serde_json::from_str(r#"{"name":"sech","amplitude":0.5}"#).unwrap();
        assert_eq!(p, q);
    }
}
