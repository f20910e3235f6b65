//! Uniform cubic B-spline curves carrying a pen radius.
//!
//! A curve over `n + 1` integer nodes `t_0 = 0, ..., t_n = n` has `n + 3`
//! control points `c_{-1}, ..., c_{n+1}`, each an `(x, y, r)` triple.
//! Control points are stored with an offset of one, so `c_j` lives at
//! storage index `j + 1`.

mod constraints;
mod json;

pub use constraints::{constraint_nullspace, Constraint, ConstraintSet, NullSpace, SparseVector};
pub use json::SplineDocument;

use crate::error::{Error, Result};

/// Squared skeleton speed below which curvature is reported as zero.
pub const MIN_SQUARED_SPEED: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    X = 0,
    Y = 1,
    R = 2,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::X, Channel::Y, Channel::R];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Subset of `{x, y, r}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChannelMask(u8);

impl ChannelMask {
    pub const NONE: ChannelMask = ChannelMask(0);
    pub const XY: ChannelMask = ChannelMask(0b011);
    pub const XYR: ChannelMask = ChannelMask(0b111);

    pub fn with(self, channel: Channel) -> Self {
        ChannelMask(self.0 | (1 << channel.index()))
    }

    pub fn contains(self, channel: Channel) -> bool {
        self.0 & (1 << channel.index()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl Default for ChannelMask {
    fn default() -> Self {
        ChannelMask::XY
    }
}

/// First and second parameter derivatives at a point of the curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub dx: f64,
    pub dy: f64,
    pub dr: f64,
    pub ddx: f64,
    pub ddy: f64,
}

/// Uniform cubic B-spline `γ(t) = Σ c_j B_j(t)` over integer nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineCurve {
    control_points: Vec<[f64; 3]>,
}

impl SplineCurve {
    /// Builds a curve from `c_{-1}, ..., c_{n+1}`; requires at least 4
    /// control points (two nodes).
    pub fn new(control_points: Vec<[f64; 3]>) -> Result<Self> {
        if control_points.len() < 4 {
            return Err(Error::TooFewNodes(control_points.len().saturating_sub(2)));
        }
        Ok(Self { control_points })
    }

    /// Curve whose control points all equal `value`.
    pub fn constant(node_count: usize, value: [f64; 3]) -> Result<Self> {
        if node_count < 2 {
            return Err(Error::TooFewNodes(node_count));
        }
        Self::new(vec![value; node_count + 2])
    }

    /// Inverse of [`SplineCurve::to_flat`].
    pub fn from_flat(node_count: usize, flat: &[f64]) -> Result<Self> {
        let expected = 3 * (node_count + 2);
        if flat.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: flat.len(),
            });
        }
        Self::new(flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect())
    }

    /// Number of nodes, `n + 1`.
    pub fn node_count(&self) -> usize {
        self.control_points.len() - 2
    }

    /// Index of the last node, `n`; also the parameter length.
    pub fn last_node(&self) -> usize {
        self.control_points.len() - 3
    }

    pub fn control_points(&self) -> &[[f64; 3]] {
        &self.control_points
    }

    pub fn control_points_mut(&mut self) -> &mut [[f64; 3]] {
        &mut self.control_points
    }

    /// `c_j` for `j ∈ [-1, n + 1]`.
    pub fn control_point(&self, j: isize) -> Option<[f64; 3]> {
        usize::try_from(j + 1)
            .ok()
            .and_then(|s| self.control_points.get(s))
            .copied()
    }

    /// Row-major flattening `(c^x_{-1}, c^y_{-1}, c^r_{-1}, c^x_0, ...)`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.control_points.iter().flatten().copied().collect()
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let n = self.last_node();
        if !(0.0..=n as f64).contains(&t) {
            return Err(Error::ParameterOutOfRange { t, n });
        }
        let i = (t.floor() as usize).min(n - 1);
        Ok((i, t - i as f64))
    }

    fn combine(&self, first: usize, w: [f64; 4]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (k, wk) in w.iter().enumerate() {
            let c = &self.control_points[first + k];
            for ch in 0..3 {
                out[ch] += wk * c[ch];
            }
        }
        out
    }

    /// `(x(t), y(t), r(t))` for `t ∈ [0, n]`.
    pub fn eval(&self, t: f64) -> Result<[f64; 3]> {
        let (i, u) = self.locate(t)?;
        Ok(self.combine(i, basis(u)))
    }

    /// Value at integer node `i`: `c_{i-1}/6 + 2c_i/3 + c_{i+1}/6`.
    pub fn node_value(&self, i: usize) -> Option<[f64; 3]> {
        if i > self.last_node() {
            return None;
        }
        let [a, b, c] = [
            self.control_points[i],
            self.control_points[i + 1],
            self.control_points[i + 2],
        ];
        Some(std::array::from_fn(|ch| {
            a[ch] / 6.0 + b[ch] * (2.0 / 3.0) + c[ch] / 6.0
        }))
    }

    pub fn eval_derivatives(&self, t: f64) -> Result<Derivatives> {
        let (i, u) = self.locate(t)?;
        let d1 = self.combine(i, basis_d1(u));
        let d2 = self.combine(i, basis_d2(u));
        Ok(Derivatives {
            dx: d1[0],
            dy: d1[1],
            dr: d1[2],
            ddx: d2[0],
            ddy: d2[1],
        })
    }

    /// Signed curvature of the `(x, y)` skeleton, zero where the squared
    /// speed drops below [`MIN_SQUARED_SPEED`].
    pub fn curvature(&self, t: f64) -> Result<f64> {
        Ok(curvature_of(&self.eval_derivatives(t)?))
    }
}

pub(crate) fn curvature_of(d: &Derivatives) -> f64 {
    let speed2 = d.dx * d.dx + d.dy * d.dy;
    if speed2 < MIN_SQUARED_SPEED {
        return 0.0;
    }
    (d.dx * d.ddy - d.dy * d.ddx) / (speed2 * speed2.sqrt())
}

/// Weights of `c_{i-1}, c_i, c_{i+1}, c_{i+2}` at local offset `u ∈ [0, 1]`
/// inside the interval `[t_i, t_{i+1}]`.
fn basis(u: f64) -> [f64; 4] {
    let v = 1.0 - u;
    let u2 = u * u;
    let u3 = u2 * u;
    [
        v * v * v / 6.0,
        (3.0 * u3 - 6.0 * u2 + 4.0) / 6.0,
        (-3.0 * u3 + 3.0 * u2 + 3.0 * u + 1.0) / 6.0,
        u3 / 6.0,
    ]
}

fn basis_d1(u: f64) -> [f64; 4] {
    let v = 1.0 - u;
    let u2 = u * u;
    [
        -v * v / 2.0,
        (3.0 * u2 - 4.0 * u) / 2.0,
        (-3.0 * u2 + 2.0 * u + 1.0) / 2.0,
        u2 / 2.0,
    ]
}

fn basis_d2(u: f64) -> [f64; 4] {
    [1.0 - u, 3.0 * u - 2.0, 1.0 - 3.0 * u, u]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Centered cardinal cubic B-spline, evaluated piece by piece.
    fn cardinal(s: f64) -> f64 {
        let a = s.abs();
        if a >= 2.0 {
            0.0
        } else if a >= 1.0 {
            (2.0 - a).powi(3) / 6.0
        } else {
            (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0
        }
    }

    fn oracle_eval(curve: &SplineCurve, t: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (s, c) in curve.control_points().iter().enumerate() {
            let b = cardinal(t - (s as f64 - 1.0));
            for ch in 0..3 {
                out[ch] += b * c[ch];
            }
        }
        out
    }

    fn lcg_curve(seed: u64, nodes: usize) -> SplineCurve {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 200.0 - 100.0
        };
        SplineCurve::new((0..nodes + 2).map(|_| [next(), next(), next()]).collect()).unwrap()
    }

    #[test]
    fn constant_curve_evaluates_to_its_control_point() {
        let c = SplineCurve::constant(5, [5.0, 7.0, 2.0]).unwrap();
        for t in [0.0, 0.3, 1.0, 2.71, 4.0] {
            let v = c.eval(t).unwrap();
            for (a, b) in v.iter().zip([5.0, 7.0, 2.0]) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_bump_at_node_gives_two_thirds() {
        let mut pts = vec![[0.0; 3]; 7];
        pts[3] = [6.0, 0.0, 0.0]; // c_2
        let c = SplineCurve::new(pts).unwrap();
        let v = c.eval(2.0).unwrap();
        assert!((v[0] - 4.0).abs() < 1e-12);
        assert_eq!(v[1], 0.0);
    }

    #[test]
    fn eval_matches_piecewise_oracle() {
        let c = lcg_curve(7, 4);
        let got = c.eval(1.37).unwrap();
        let want = oracle_eval(&c, 1.37);
        for ch in 0..3 {
            assert!((got[ch] - want[ch]).abs() <= 1e-12 * want[ch].abs().max(1.0));
        }
    }

    #[test]
    fn out_of_range_parameter_is_rejected() {
        let c = lcg_curve(1, 4);
        assert!(matches!(
            c.eval(-0.01),
            Err(Error::ParameterOutOfRange { .. })
        ));
        assert!(c.eval(3.0001).is_err());
        assert!(c.eval(f64::NAN).is_err());
        assert!(c.eval(3.0).is_ok());
    }

    #[test]
    fn constant_curve_has_zero_derivatives() {
        let c = SplineCurve::constant(4, [1.0, -2.0, 3.0]).unwrap();
        let d = c.eval_derivatives(1.7).unwrap();
        for v in [d.dx, d.dy, d.dr, d.ddx, d.ddy] {
            assert!(v.abs() < 1e-12);
        }
        assert_eq!(c.curvature(2.2).unwrap(), 0.0);
    }

    #[test]
    fn equally_spaced_line_has_constant_speed() {
        let s = 3.5;
        let pts = (0..8)
            .map(|j| {
                let k = j as f64 - 1.0;
                [2.0 + s * k * 0.6, 1.0 + s * k * 0.8, 4.0]
            })
            .collect();
        let c = SplineCurve::new(pts).unwrap();
        for t in [0.5, 1.25, 3.0, 4.9] {
            let d = c.eval_derivatives(t).unwrap();
            assert!(((d.dx * d.dx + d.dy * d.dy).sqrt() - s).abs() < 1e-12);
            assert!(d.ddx.abs() < 1e-12 && d.ddy.abs() < 1e-12);
            assert!(c.curvature(t).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        let c = lcg_curve(42, 5);
        let h = 1e-5;
        let t = 2.5;
        let p = c.eval(t + h).unwrap();
        let m = c.eval(t - h).unwrap();
        let d = c.eval_derivatives(t).unwrap();
        for (ch, got) in [d.dx, d.dy, d.dr].into_iter().enumerate() {
            assert!((got - (p[ch] - m[ch]) / (2.0 * h)).abs() < 1e-6);
        }
    }

    #[test]
    fn circle_curvature_is_inverse_radius() {
        // Control points on a circle of radius 40 with 0.1 rad spacing; the
        // spline shrinks the circle slightly, hence the 5% band.
        let rho = 40.0;
        let pts = (0..40)
            .map(|j| {
                let a = 0.1 * j as f64;
                [rho * a.cos(), rho * a.sin(), 3.0]
            })
            .collect();
        let c = SplineCurve::new(pts).unwrap();
        for t in [1.0, 10.3, 20.0, 33.9] {
            let k = c.curvature(t).unwrap();
            assert!((k - 1.0 / rho).abs() <= 0.05 / rho, "K({t}) = {k}");
        }
    }

    #[test]
    fn degenerate_curve_has_zero_curvature() {
        let c = SplineCurve::constant(3, [4.0, 4.0, 4.0]).unwrap();
        assert_eq!(c.curvature(1.5).unwrap(), 0.0);
    }

    #[test]
    fn flat_roundtrip_and_layout() {
        let c = lcg_curve(3, 3);
        let flat = c.to_flat();
        assert_eq!(flat.len(), 3 * 5);
        assert_eq!(flat[3], c.control_point(0).unwrap()[0]);
        assert_eq!(SplineCurve::from_flat(3, &flat).unwrap(), c);
        assert!(SplineCurve::from_flat(4, &flat).is_err());
    }

    proptest! {
        #[test]
        fn partition_of_unity(u in 0.0f64..=1.0) {
            let sum: f64 = basis(u).iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn node_relation_holds(seed in any::<u64>(), nodes in 2usize..12) {
            let c = lcg_curve(seed, nodes);
            for i in 0..nodes {
                let v = c.eval(i as f64).unwrap();
                let w = c.node_value(i).unwrap();
                for ch in 0..3 {
                    prop_assert!((v[ch] - w[ch]).abs() <= 1e-12 * w[ch].abs().max(1.0));
                }
            }
        }

        #[test]
        fn analytic_derivatives_agree_with_finite_differences(
            seed in any::<u64>(),
            frac in 0.01f64..0.99,
        ) {
            let c = lcg_curve(seed, 6);
            let t = 0.01 + frac * 4.98;
            // third derivatives jump at knots
            prop_assume!((t - t.round()).abs() > 1e-4);
            let h = 1e-5;
            let p = c.eval(t + h).unwrap();
            let m = c.eval(t - h).unwrap();
            let d = c.eval_derivatives(t).unwrap();
            for (ch, got) in [d.dx, d.dy, d.dr].into_iter().enumerate() {
                prop_assert!((got - (p[ch] - m[ch]) / (2.0 * h)).abs() <= 1e-6);
            }
            let p1 = c.eval_derivatives(t + h).unwrap();
            let m1 = c.eval_derivatives(t - h).unwrap();
            prop_assert!((d.ddx - (p1.dx - m1.dx) / (2.0 * h)).abs() <= 1e-6);
            prop_assert!((d.ddy - (p1.dy - m1.dy) / (2.0 * h)).abs() <= 1e-6);
        }
    }
}
