//! Closed forms for a two-level Hamiltonian `diag(eps_gs, eps_ex)`.
//!
//! Everything here is scalar arithmetic with no dependence on the
//! simulator, so it doubles as an oracle for it. `w` denotes the weight of
//! the excited state relative to the ground state, `tan^2 phi` for an
//! input `(cos phi, sin phi)`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLevelParams {
    pub eps_gs: f64,
    pub eps_ex: f64,
    pub m0: f64,
    pub dtau: f64,
}

impl TwoLevelParams {
    pub fn new(eps_gs: f64, eps_ex: f64, m0: f64, dtau: f64) -> Result<Self> {
        if !(m0 > 0.0 && m0 < 1.0) {
            return Err(Error::Domain {
                what: "m0",
                value: m0,
            });
        }
        if (m0 - FRAC_1_SQRT_2).abs() < 1e-12 {
            return Err(Error::InvalidParameter(
                "m0 must differ from 1/sqrt(2)".to_string(),
            ));
        }
        if !(dtau >= 0.0 && dtau.is_finite()) {
            return Err(Error::Domain {
                what: "dtau",
                value: dtau,
            });
        }
        if !(eps_gs.is_finite() && eps_ex.is_finite()) {
            return Err(Error::InvalidParameter(
                "energies must be finite".to_string(),
            ));
        }
        Ok(TwoLevelParams {
            eps_gs,
            eps_ex,
            m0,
            dtau,
        })
    }

    /// Excitation energy `eps_ex - eps_gs`.
    pub fn delta_eps(&self) -> f64 {
        self.eps_ex - self.eps_gs
    }

    pub fn mean_eps(&self) -> f64 {
        0.5 * (self.eps_ex + self.eps_gs)
    }

    /// Exact-circuit decay factor `exp(-delta_eps dtau)`.
    pub fn alpha(&self) -> f64 {
        (-self.delta_eps() * self.dtau).exp()
    }

    pub fn kappa(&self) -> f64 {
        if self.m0 > FRAC_1_SQRT_2 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn theta0(&self) -> f64 {
        let m = self.m0;
        self.kappa() * ((m + (1.0 - m * m).sqrt()) * FRAC_1_SQRT_2).min(1.0).acos()
    }

    pub fn s1(&self) -> f64 {
        self.m0 / (1.0 - self.m0 * self.m0).sqrt()
    }

    /// `gamma = cos(theta0 - eps s1 dtau) + sin(theta0 - eps s1 dtau)`.
    pub fn gamma(&self, eps: f64) -> f64 {
        let phi = self.theta0() - eps * self.s1() * self.dtau;
        phi.cos() + phi.sin()
    }

    /// First-order decay factor `gamma_ex / gamma_gs`.
    pub fn alpha_prime(&self) -> Result<f64> {
        let g = self.gamma(self.eps_gs);
        if g.abs() < 1e-15 {
            return Err(Error::DegenerateGamma);
        }
        Ok(self.gamma(self.eps_ex) / g)
    }
}

/// `arccos((m + sqrt(1 - m^2)) / sqrt(2))` with `m = m0 exp(-eps dtau)`.
pub fn theta_level(eps: f64, p: &TwoLevelParams) -> Result<f64> {
    let m = p.m0 * (-eps * p.dtau).exp();
    if m.is_nan() || m >= 1.0 {
        return Err(Error::Domain {
            what: "m0 exp(-eps dtau)",
            value: m,
        });
    }
    let arg = (m + (1.0 - m * m).sqrt()) * FRAC_1_SQRT_2;
    if arg > 1.0 + 1e-15 {
        return Err(Error::Domain {
            what: "arccos argument",
            value: arg,
        });
    }
    Ok(arg.min(1.0).acos())
}

fn check_weight(w: f64) -> Result<()> {
    if !(w >= 0.0 && w.is_finite()) {
        return Err(Error::Domain {
            what: "relative weight",
            value: w,
        });
    }
    Ok(())
}

/// Exact circuit: success probability of a step from relative weight `w`
/// and the relative weight after it.
pub fn exact_step_closed_form(w: f64, p: &TwoLevelParams) -> Result<(f64, f64)> {
    check_weight(w)?;
    let m2 = p.m0 * p.m0;
    let prob =
        m2 * ((-2.0 * p.eps_gs * p.dtau).exp() + (-2.0 * p.eps_ex * p.dtau).exp() * w) / (1.0 + w);
    Ok((prob, p.alpha().powi(2) * w))
}

/// First-order circuit counterpart of [`exact_step_closed_form`].
pub fn approx_step_closed_form(w: f64, p: &TwoLevelParams) -> Result<(f64, f64)> {
    check_weight(w)?;
    let a = p.alpha_prime()?;
    let x = p.s1() * p.dtau;
    let t2 = 2.0 * p.theta0();
    let prob = 0.5
        + ((t2 - 2.0 * p.eps_gs * x).sin() + (t2 - 2.0 * p.eps_ex * x).sin() * w)
            / (2.0 * (1.0 + w));
    Ok((prob, a * a * w))
}

/// Small-step estimate of how many first-order steps bring the relative
/// weight from `w0` down to `delta`:
/// `-(1 + tan theta0) ln(delta / w0) / (2 s1 delta_eps dtau)`.
pub fn steps_to_weight(delta: f64, w0: f64, p: &TwoLevelParams) -> Result<f64> {
    if !(delta > 0.0 && delta <= w0 && w0.is_finite()) {
        return Err(Error::Domain {
            what: "target weight",
            value: delta,
        });
    }
    let rate = 2.0 * p.s1() * p.delta_eps() * p.dtau;
    if rate.is_nan() || rate <= 0.0 {
        return Err(Error::Domain {
            what: "delta_eps * dtau",
            value: p.delta_eps() * p.dtau,
        });
    }
    Ok(-(1.0 + p.theta0().tan()) * (delta / w0).ln() / rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(m0: f64, dtau: f64) -> TwoLevelParams {
        TwoLevelParams::new(0.0, 1.0, m0, dtau).unwrap()
    }

    #[test]
    fn theta_at_zero_dtau() {
        let t = theta_level(3.0, &params(0.8, 0.0)).unwrap();
        assert_abs_diff_eq!(t, 0.141897054604164, epsilon = 1e-12);
    }

    #[test]
    fn theta_at_high_energy() {
        let t = theta_level(1e3, &params(0.8, 0.5)).unwrap();
        assert_abs_diff_eq!(t, std::f64::consts::FRAC_PI_4, epsilon = 1e-12);
    }

    #[test]
    fn theta_domain() {
        assert!(theta_level(-10.0, &params(0.9, 0.5)).is_err());
    }

    #[test]
    fn saturated_probability() {
        let (p0, w1) = exact_step_closed_form(0.0, &params(0.8, 0.3)).unwrap();
        assert_abs_diff_eq!(p0, 0.64, epsilon = 1e-15);
        assert_eq!(w1, 0.0);
    }

    #[test]
    fn negative_weight_rejected() {
        assert!(exact_step_closed_form(-1.0, &params(0.8, 0.3)).is_err());
    }

    #[test]
    fn degenerate_levels_freeze_weight() {
        let p = TwoLevelParams::new(0.4, 0.4, 0.8, 0.3).unwrap();
        assert_abs_diff_eq!(p.alpha_prime().unwrap(), 1.0, epsilon = 1e-15);
        let (_, w) = approx_step_closed_form(0.7, &p).unwrap();
        assert_abs_diff_eq!(w, 0.7, epsilon = 1e-15);
    }

    #[test]
    fn small_step_limit_of_first_order_probability() {
        for i in 0..10 {
            let m0 = 0.05 + 0.09 * i as f64;
            let p = params(m0, 0.0);
            assert_abs_diff_eq!(
                (2.0 * p.theta0()).sin(),
                2.0 * m0 * m0 - 1.0,
                epsilon = 1e-12
            );
            let (prob, _) = approx_step_closed_form(0.3, &p).unwrap();
            assert_abs_diff_eq!(prob, m0 * m0, epsilon = 1e-12);
        }
    }

    #[test]
    fn degenerate_gamma() {
        // theta0 - eps_gs s1 dtau = -pi/4
        let base = params(0.8, 1.0);
        let eps_gs = (base.theta0() + std::f64::consts::FRAC_PI_4) / base.s1();
        let p = TwoLevelParams::new(eps_gs, eps_gs + 1.0, 0.8, 1.0).unwrap();
        assert_eq!(p.alpha_prime(), Err(Error::DegenerateGamma));
    }

    #[test]
    fn steps_to_weight_structure() {
        let p = params(0.8, 0.1);
        assert_eq!(steps_to_weight(1.0, 1.0, &p).unwrap(), 0.0);
        let q = TwoLevelParams::new(0.0, 2.0, 0.8, 0.1).unwrap();
        assert_abs_diff_eq!(
            steps_to_weight(1e-3, 1.0, &q).unwrap(),
            steps_to_weight(1e-3, 1.0, &p).unwrap() / 2.0,
            epsilon = 1e-12
        );
        assert!(steps_to_weight(2.0, 1.0, &p).is_err());
        assert!(steps_to_weight(0.0, 1.0, &p).is_err());
    }
}
