//! Not-a-knot cubic spline interpolation.
//!
//! The not-a-knot end conditions force the third derivative to be
//! continuous across the second and the second-to-last knots, so the first
//! two and the last two pieces are each a single cubic. Cubic data is
//! reproduced exactly. Outside the knot range the spline is continued
//! linearly from the boundary value and slope, and every such evaluation is
//! counted.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

/// `value(x) = a + b·s + c·s² + d·s³` with `s = x − left`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicPiece {
    pub left: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl CubicPiece {
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        let s = x - self.left;
        self.a + s * (self.b + s * (self.c + s * self.d))
    }

    #[inline]
    pub fn slope(&self, x: f64) -> f64 {
        let s = x - self.left;
        self.b + s * (2.0 * self.c + s * 3.0 * self.d)
    }

    #[inline]
    pub fn curvature(&self, x: f64) -> f64 {
        let s = x - self.left;
        2.0 * self.c + 6.0 * self.d * s
    }
}

#[derive(Debug)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    pieces: Vec<CubicPiece>,
    right_slope: f64,
    out_of_domain: AtomicU64,
}

impl Clone for CubicSpline {
    fn clone(&self) -> Self {
        Self {
            knots: self.knots.clone(),
            values: self.values.clone(),
            pieces: self.pieces.clone(),
            right_slope: self.right_slope,
            out_of_domain: AtomicU64::new(self.out_of_domain.load(Ordering::Relaxed)),
        }
    }
}

impl CubicSpline {
    /// Fits the not-a-knot spline through `(knots[j], values[j])`.
    pub fn fit(knots: &[f64], values: &[f64]) -> Result<Self> {
        let n = knots.len();
        if n < 4 {
            return Err(Error::config(format!("spline needs at least 4 knots, got {n}")));
        }
        if values.len() != n {
            return Err(Error::config(format!(
                "spline knots and values differ in length ({n} vs {})",
                values.len()
            )));
        }
        if knots.iter().chain(values).any(|v| !v.is_finite()) {
            return Err(Error::config("spline data must be finite"));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("spline knots must be strictly increasing"));
        }

        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let slopes: Vec<f64> = values
            .windows(2)
            .zip(&h)
            .map(|(v, &hi)| (v[1] - v[0]) / hi)
            .collect();

        // Second derivatives m_1..m_{n-2} from the interior continuity
        // equations, with m_0 and m_{n-1} eliminated through the not-a-knot
        // conditions. The result is tridiagonal.
        let unknowns = n - 2;
        let mut sub = vec![0.0; unknowns];
        let mut diag = vec![0.0; unknowns];
        let mut sup = vec![0.0; unknowns];
        let mut rhs = vec![0.0; unknowns];
        for r in 0..unknowns {
            let i = r + 1;
            sub[r] = h[i - 1];
            diag[r] = 2.0 * (h[i - 1] + h[i]);
            sup[r] = h[i];
            rhs[r] = 6.0 * (slopes[i] - slopes[i - 1]);
        }
        // m_0 = ((h0 + h1) m_1 − h0 m_2) / h1
        let (h0, h1) = (h[0], h[1]);
        diag[0] += h0 * (h0 + h1) / h1;
        sup[0] -= h0 * h0 / h1;
        // m_{n-1} = ((hl + hp) m_{n-2} − hl m_{n-3}) / hp
        let (hp, hl) = (h[n - 3], h[n - 2]);
        let last = unknowns - 1;
        diag[last] += hl * (hl + hp) / hp;
        sub[last] -= hl * hl / hp;

        let interior = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
        let mut m = Vec::with_capacity(n);
        m.push(((h0 + h1) * interior[0] - h0 * interior[1]) / h1);
        m.extend_from_slice(&interior);
        m.push(((hl + hp) * interior[last] - hl * interior[last - 1]) / hp);

        let pieces: Vec<CubicPiece> = (0..n - 1)
            .map(|i| CubicPiece {
                left: knots[i],
                a: values[i],
                b: slopes[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0,
                c: m[i] / 2.0,
                d: (m[i + 1] - m[i]) / (6.0 * h[i]),
            })
            .collect();
        let right_slope = pieces[n - 2].slope(knots[n - 1]);

        Ok(Self {
            knots: knots.to_vec(),
            values: values.to_vec(),
            pieces,
            right_slope,
            out_of_domain: AtomicU64::new(0),
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn pieces(&self) -> &[CubicPiece] {
        &self.pieces
    }

    /// Number of evaluations that fell outside `[knots.first, knots.last]`.
    pub fn out_of_domain_count(&self) -> u64 {
        self.out_of_domain.load(Ordering::Relaxed)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.knots[0] && x <= self.knots[self.knots.len() - 1]
    }

    /// Spline value at `x`; linear continuation outside the knot range.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFinite { context: "spline argument", x });
        }
        let n = self.knots.len();
        let (lo, hi) = (self.knots[0], self.knots[n - 1]);
        if x < lo {
            self.out_of_domain.fetch_add(1, Ordering::Relaxed);
            return Ok(self.values[0] + self.pieces[0].b * (x - lo));
        }
        if x > hi {
            self.out_of_domain.fetch_add(1, Ordering::Relaxed);
            return Ok(self.values[n - 1] + self.right_slope * (x - hi));
        }
        Ok(self.pieces[self.interval(x)].value(x))
    }

    /// Index of the piece containing `x` (clamped to the valid range).
    fn interval(&self, x: f64) -> usize {
        let idx = self.knots.partition_point(|&k| k <= x);
        idx.saturating_sub(1).min(self.pieces.len() - 1)
    }
}

/// Thomas algorithm. `sub[0]` and `sup[last]` are ignored.
fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return Err(Error::config("singular spline system"));
    }
    c[0] = sup[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - sub[i] * c[i - 1];
        if pivot == 0.0 {
            return Err(Error::config("singular spline system"));
        }
        c[i] = if i + 1 < n { sup[i] / pivot } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / pivot;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|j| a + (b - a) * j as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn rejects_bad_input() {
        assert!(CubicSpline::fit(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]).is_err());
        assert!(CubicSpline::fit(&[0.0, 1.0, 1.0, 2.0], &[0.0; 4]).is_err());
        assert!(CubicSpline::fit(&[0.0, 2.0, 1.0, 3.0], &[0.0; 4]).is_err());
        assert!(CubicSpline::fit(&[0.0, 1.0, 2.0, 3.0], &[0.0; 5]).is_err());
        assert!(CubicSpline::fit(&[0.0, 1.0, 2.0, 3.0], &[0.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn reproduces_linear_everywhere() {
        let xs = [-1.0, -0.3, 0.2, 0.9, 1.1, 2.5, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 0.5).collect();
        let s = CubicSpline::fit(&xs, &ys).unwrap();
        for k in 0..=200 {
            let x = -3.0 + 9.0 * k as f64 / 200.0;
            assert!((s.eval(x).unwrap() - (3.0 * x - 0.5)).abs() < 1e-12, "x = {x}");
        }
        assert!(s.out_of_domain_count() > 0);
    }

    #[test]
    fn reproduces_cubic() {
        let p = |x: f64| x * x * x - 2.0 * x * x + x;
        let xs = uniform(-2.0, 2.0, 10);
        let ys: Vec<f64> = xs.iter().map(|&x| p(x)).collect();
        let s = CubicSpline::fit(&xs, &ys).unwrap();
        assert!((s.eval(0.37).unwrap() - p(0.37)).abs() < 1e-10);
    }

    #[test]
    fn four_points_is_the_interpolating_cubic() {
        let p = |x: f64| 0.5 * x * x * x - x + 2.0;
        let xs = [0.0, 0.4, 1.5, 2.0];
        let ys: Vec<f64> = xs.iter().map(|&x| p(x)).collect();
        let s = CubicSpline::fit(&xs, &ys).unwrap();
        for x in [0.1, 0.7, 1.2, 1.9] {
            assert!((s.eval(x).unwrap() - p(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_data() {
        let xs = uniform(0.0, 1.0, 7);
        let s = CubicSpline::fit(&xs, &[2.5; 7]).unwrap();
        for x in [-10.0, 0.0, 0.33, 1.0, 17.0] {
            assert_eq!(s.eval(x).unwrap(), 2.5);
        }
    }

    #[test]
    fn interpolates_and_is_c2() {
        let xs: Vec<f64> = (0..25).map(|j| (j as f64).powf(1.3) * 0.2).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (1.7 * x).sin() * x.exp().ln_1p()).collect();
        let s = CubicSpline::fit(&xs, &ys).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((s.eval(*x).unwrap() - y).abs() <= 1e-13 * y.abs().max(1.0));
        }
        let pcs = s.pieces();
        for j in 1..pcs.len() {
            let k = xs[j];
            let (l, r) = (&pcs[j - 1], &pcs[j]);
            let scale1 = l.slope(k).abs().max(1.0);
            let scale2 = l.curvature(k).abs().max(1.0);
            assert!((l.value(k) - r.value(k)).abs() <= 1e-12 * l.value(k).abs().max(1.0));
            assert!((l.slope(k) - r.slope(k)).abs() <= 1e-10 * scale1);
            assert!((l.curvature(k) - r.curvature(k)).abs() <= 1e-10 * scale2);
        }
        // not-a-knot: third derivative continuous at the second and penultimate knots
        let last = pcs.len() - 1;
        assert!((pcs[0].d - pcs[1].d).abs() <= 1e-9 * pcs[0].d.abs().max(1.0));
        assert!((pcs[last].d - pcs[last - 1].d).abs() <= 1e-9 * pcs[last].d.abs().max(1.0));
    }

    #[test]
    fn fourth_order_accuracy_on_sine() {
        let max_err = |n: usize| {
            let xs = uniform(0.0, std::f64::consts::PI, n);
            let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
            let s = CubicSpline::fit(&xs, &ys).unwrap();
            (0..=2000)
                .map(|k| std::f64::consts::PI * k as f64 / 2000.0)
                .map(|x| (s.eval(x).unwrap() - x.sin()).abs())
                .fold(0.0, f64::max)
        };
        let errs: Vec<f64> = [9usize, 17, 33, 65].iter().map(|&n| max_err(n)).collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 3.5, "observed order {order} from {errs:?}");
        }
    }

    #[test]
    fn extrapolation_and_counter() {
        let xs = uniform(0.0, 3.0, 6);
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let s = CubicSpline::fit(&xs, &ys).unwrap();
        assert_eq!(s.out_of_domain_count(), 0);
        // boundary slope of x² is reproduced (quadratics are exact)
        assert!((s.eval(-1.0).unwrap() - 0.0).abs() < 1e-12);
        assert!((s.eval(4.0).unwrap() - (9.0 + 6.0)).abs() < 1e-12);
        assert_eq!(s.out_of_domain_count(), 2);
        s.eval(1.5).unwrap();
        assert_eq!(s.out_of_domain_count(), 2);
        assert!(s.eval(f64::NAN).is_err());
    }

    #[test]
    fn deterministic_fit_and_eval() {
        let xs = uniform(-4.0, 4.0, 33);
        let ys: Vec<f64> = xs.iter().map(|x| (-x * x).exp()).collect();
        let a = CubicSpline::fit(&xs, &ys).unwrap();
        let b = CubicSpline::fit(&xs, &ys).unwrap();
        assert_eq!(a.pieces(), b.pieces());
        for k in 0..100 {
            let x = -5.0 + 0.1 * k as f64;
            assert_eq!(a.eval(x).unwrap().to_bits(), b.eval(x).unwrap().to_bits());
        }
    }
}
