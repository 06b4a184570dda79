//! Separable objective `Σ ½a_i(x_i − c_i)² + log(1 + exp(b_i(x_i − d_i)))`.

use crate::problem::Objective;

/// `log(1 + e^z)` without overflow.
#[inline]
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparableLogExp {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
    lipschitz: Vec<f64>,
}

impl SeparableLogExp {
    /// Panics unless all vectors share one length and every `a_i > 0`.
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>, d: Vec<f64>) -> Self {
        let n = a.len();
        assert!(b.len() == n && c.len() == n && d.len() == n, "coefficient lengths differ");
        assert!(a.iter().all(|&v| v > 0.0), "quadratic coefficients must be positive");
        let lipschitz = a.iter().zip(&b).map(|(a, b)| a + 0.25 * b * b).collect();
        Self { a, b, c, d, lipschitz }
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    /// `L_i = a_i + b_i²/4`, the Lipschitz constant of `f_i'`.
    pub fn lipschitz(&self) -> &[f64] {
        &self.lipschitz
    }

    /// Strong convexity modulus `min_i a_i`.
    pub fn strong_convexity(&self) -> f64 {
        self.a.iter().copied().fold(f64::INFINITY, f64::min)
    }

    #[inline]
    pub fn term(&self, i: usize, x: f64) -> f64 {
        let r = x - self.c[i];
        0.5 * self.a[i] * r * r + softplus(self.b[i] * (x - self.d[i]))
    }

    #[inline]
    pub fn term_derivative(&self, i: usize, x: f64) -> f64 {
        self.a[i] * (x - self.c[i]) + self.b[i] * sigmoid(self.b[i] * (x - self.d[i]))
    }

    #[inline]
    pub fn term_second_derivative(&self, i: usize, x: f64) -> f64 {
        let s = sigmoid(self.b[i] * (x - self.d[i]));
        self.a[i] + self.b[i] * self.b[i] * s * (1.0 - s)
    }

    /// `f_i(x + t) − f_i(x)`, with the quadratic part expanded to avoid
    /// cancellation.
    #[inline]
    fn term_delta(&self, i: usize, x: f64, t: f64) -> f64 {
        let quad = 0.5 * self.a[i] * t * (2.0 * (x - self.c[i]) + t);
        let z0 = self.b[i] * (x - self.d[i]);
        let bt = self.b[i] * t;
        // softplus(z0 + bt) − softplus(z0) = log1p(σ(z0)·(e^{bt} − 1))
        let soft = if bt.abs() <= 1.0 {
            (sigmoid(z0) * bt.exp_m1()).ln_1p()
        } else {
            softplus(z0 + bt) - softplus(z0)
        };
        quad + soft
    }
}

impl Objective for SeparableLogExp {
    type Cache = ();

    fn dim(&self) -> usize {
        self.a.len()
    }

    fn build_cache(&self, _x: &[f64]) {}

    fn cached_value(&self, _: &(), x: &[f64]) -> f64 {
        x.iter().enumerate().map(|(i, &v)| self.term(i, v)).sum()
    }

    #[inline]
    fn cached_partial(&self, _: &(), x: &[f64], i: usize) -> f64 {
        self.term_derivative(i, x[i])
    }

    fn cached_pair_delta(&self, _: &(), x: &[f64], i: usize, j: usize, t: f64) -> f64 {
        self.term_delta(i, x[i], t) + self.term_delta(j, x[j], -t)
    }

    fn cached_pair_slope(&self, _: &(), x: &[f64], i: usize, j: usize, t: f64) -> f64 {
        self.term_derivative(i, x[i] + t) - self.term_derivative(j, x[j] - t)
    }

    fn apply_pair_move(&self, _: &mut (), _x: &[f64], _i: usize, _j: usize, _t: f64) {}

    fn pair_lipschitz(&self, i: usize, j: usize) -> Option<f64> {
        Some(self.lipschitz[i] + self.lipschitz[j])
    }

    fn coordinate_lipschitz(&self, i: usize) -> Option<f64> {
        Some(self.lipschitz[i])
    }

    fn is_separable(&self) -> bool {
        true
    }
}
