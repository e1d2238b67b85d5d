//! Gauss-Kronrod quadrature and cubic Hermite interpolation.
//!
//! The phase-plane integrals are evaluated over interpolated trajectory
//! data, so both live here: the interpolant is only C1 at its nodes, and
//! the adaptive driver is seeded with those nodes as breakpoints so that no
//! panel straddles a kink.

use std::collections::BinaryHeap;

/// Kronrod abscissae for the 15-point rule (non-negative half, descending).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss 7-point weights, paired with the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Value and error estimate of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;

    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

/// One application of the 7/15 Gauss-Kronrod pair on `[a, b]`.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Estimate {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Estimate {
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Adaptive Gauss-Kronrod integration over consecutive panels.
///
/// `breaks` must be sorted and seed the initial panels; the panel with the
/// largest Kronrod/Gauss discrepancy is bisected until the summed error
/// estimate is below `tol` or the subdivision budget runs out.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], tol: f64) -> Estimate {
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] != w[0] {
            heap.push(Panel::new(f, w[0], w[1]));
        }
    }
    let total = |heap: &BinaryHeap<Panel>| {
        heap.iter().fold(Estimate { value: 0.0, error: 0.0 }, |acc, p| acc + p.est)
    };
    let mut sum = total(&heap);
    for _ in 0..MAX_SUBDIVISIONS {
        if sum.error <= tol.max(4.0 * f64::EPSILON * sum.value.abs()) {
            break;
        }
        let Some(worst) = heap.peek() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            break;
        }
        let worst = heap.pop().expect("peeked");
        let (left, right) = (Panel::new(f, worst.a, mid), Panel::new(f, mid, worst.b));
        sum.value += left.est.value + right.est.value - worst.est.value;
        sum.error += left.est.error + right.est.error - worst.est.error;
        heap.push(left);
        heap.push(right);
    }
    // resum to shed the drift of the running updates
    total(&heap)
}

/// Adaptive integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Estimate {
    integrate_panels(f, &[a, b], tol)
}

const MAX_SUBDIVISIONS: usize = 2000;

struct Panel {
    a: f64,
    b: f64,
    est: Estimate,
}

impl Panel {
    fn new<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Self {
        Panel { a, b, est: gk15(f, a, b) }
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.est.error.total_cmp(&other.est.error).is_eq()
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

/// Piecewise cubic Hermite interpolant through `(x_i, y_i)` with slopes `d_i`.
///
/// Abscissae must be strictly increasing. Evaluation outside the node range
/// extrapolates with the end cubic; callers that care handle the ends
/// themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermite {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Hermite {
    pub fn new(x: Vec<f64>, y: Vec<f64>, d: Vec<f64>) -> Self {
        assert!(x.len() >= 2, "Hermite interpolant needs two nodes");
        assert!(x.len() == y.len() && y.len() == d.len());
        debug_assert!(x.windows(2).all(|w| w[0] < w[1]));
        Hermite { x, y, d }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn slopes(&self) -> &[f64] {
        &self.d
    }

    pub fn first(&self) -> f64 {
        self.x[0]
    }

    pub fn last(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    /// Index `i` such that `x[i] <= t <= x[i+1]`, clamped to the end intervals.
    pub fn interval(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_with_derivative(t).0
    }

    /// Interpolant value and its derivative at `t`.
    pub fn eval_with_derivative(&self, t: f64) -> (f64, f64) {
        let i = self.interval(t);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let h = x1 - x0;
        let s = (t - x0) / h;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (d0, d1) = (self.d[i] * h, self.d[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let value = h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1;
        let dh00 = 6.0 * s2 - 6.0 * s;
        let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
        let dh01 = -6.0 * s2 + 6.0 * s;
        let dh11 = 3.0 * s2 - 2.0 * s;
        let deriv = (dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1) / h;
        (value, deriv)
    }
}
