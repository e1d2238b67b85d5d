//! Dormand-Prince 5(4) embedded Runge-Kutta stepping.
//!
//! Only the single-step kernel and the step-size controller live here; the
//! phase-plane driver owns the integration loop because it needs to inspect
//! every accepted step for its event classification.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// difference between the 5th and embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Tolerances and step bounds for the adaptive controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub h_max: f64,
}

/// Outcome of one attempted step.
#[derive(Debug, Clone, Copy)]
pub enum Attempt<const N: usize> {
    /// Step accepted; new state, derivative at the new state and the
    /// suggested next step size.
    Accepted {
        y: [f64; N],
        dy: [f64; N],
        h_next: f64,
    },
    /// Error too large; retry with the suggested smaller step.
    Rejected { h_next: f64 },
    /// The right-hand side could not be evaluated at some stage.
    Undefined,
}

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (coef, k) in terms {
        for i in 0..N {
            out[i] += coef * k[i];
        }
    }
    out
}

/// Attempt a single Dormand-Prince step of size `h` from `(t, y)`.
///
/// `dy0` is the derivative at the start point (first-same-as-last reuse).
/// The right-hand side returns `None` where it is undefined, which makes
/// the whole attempt `Undefined`.
pub fn attempt<const N: usize, F>(
    rhs: &F,
    t: f64,
    y: &[f64; N],
    dy0: &[f64; N],
    h: f64,
    ctl: &StepControl,
) -> Attempt<N>
where
    F: Fn(f64, &[f64; N]) -> Option<[f64; N]>,
{
    let k1 = *dy0;
    let Some(k2) = rhs(t + C2 * h, &axpy(y, &[(h * A21, &k1)])) else {
        return Attempt::Undefined;
    };
    let Some(k3) = rhs(t + C3 * h, &axpy(y, &[(h * A31, &k1), (h * A32, &k2)])) else {
        return Attempt::Undefined;
    };
    let Some(k4) = rhs(
        t + C4 * h,
        &axpy(y, &[(h * A41, &k1), (h * A42, &k2), (h * A43, &k3)]),
    ) else {
        return Attempt::Undefined;
    };
    let Some(k5) = rhs(
        t + C5 * h,
        &axpy(
            y,
            &[(h * A51, &k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)],
        ),
    ) else {
        return Attempt::Undefined;
    };
    let Some(k6) = rhs(
        t + h,
        &axpy(
            y,
            &[
                (h * A61, &k1),
                (h * A62, &k2),
                (h * A63, &k3),
                (h * A64, &k4),
                (h * A65, &k5),
            ],
        ),
    ) else {
        return Attempt::Undefined;
    };
    let y_new = axpy(
        y,
        &[
            (h * A71, &k1),
            (h * A73, &k3),
            (h * A74, &k4),
            (h * A75, &k5),
            (h * A76, &k6),
        ],
    );
    let Some(k7) = rhs(t + h, &y_new) else {
        return Attempt::Undefined;
    };

    let mut err2 = 0.0;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = ctl.atol + ctl.rtol * y[i].abs().max(y_new[i].abs());
        err2 += (e / scale).powi(2);
    }
    let err = (err2 / N as f64).sqrt();
    if !err.is_finite() {
        return Attempt::Rejected { h_next: 0.2 * h };
    }

    let factor = if err == 0.0 {
        5.0
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    };
    if err <= 1.0 {
        Attempt::Accepted {
            y: y_new,
            dy: k7,
            h_next: (h * factor).min(ctl.h_max),
        }
    } else {
        Attempt::Rejected {
            h_next: h * factor.min(0.9),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate<const N: usize, F>(rhs: F, t0: f64, y0: [f64; N], t1: f64, ctl: StepControl) -> [f64; N]
    where
        F: Fn(f64, &[f64; N]) -> Option<[f64; N]>,
    {
        let mut t = t0;
        let mut y = y0;
        let mut dy = rhs(t, &y).unwrap();
        let mut h: f64 = 1e-3;
        while t < t1 {
            h = h.min(t1 - t);
            match attempt(&rhs, t, &y, &dy, h, &ctl) {
                Attempt::Accepted { y: yn, dy: dn, h_next } => {
                    t += h;
                    y = yn;
                    dy = dn;
                    h = h_next;
                }
                Attempt::Rejected { h_next } => h = h_next,
                Attempt::Undefined => panic!("undefined"),
            }
        }
        y
    }

    const CTL: StepControl = StepControl {
        rtol: 1e-11,
        atol: 1e-12,
        h_min: 1e-14,
        h_max: 0.5,
    };

    #[test]
    fn harmonic_oscillator_one_period() {
        let y = integrate(
            |_, y: &[f64; 2]| Some([y[1], -y[0]]),
            0.0,
            [1.0, 0.0],
            2.0 * std::f64::consts::PI,
            CTL,
        );
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9, "{y:?}");
    }

    #[test]
    fn logistic_growth_matches_closed_form() {
        let y = integrate(|_, y: &[f64; 1]| Some([y[0] * (1.0 - y[0])]), 0.0, [0.5], 2.0, CTL);
        let exact = 1.0 / (1.0 + (-2.0f64).exp());
        assert!((y[0] - exact).abs() < 1e-10);
    }

    #[test]
    fn undefined_rhs_is_reported() {
        let rhs = |_, y: &[f64; 1]| if y[0] > 1.0 { None } else { Some([10.0]) };
        let out = attempt(&rhs, 0.0, &[0.99], &[10.0], 0.1, &CTL);
        assert!(matches!(out, Attempt::Undefined));
    }
}
