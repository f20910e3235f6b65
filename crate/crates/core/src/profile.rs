//! Closed-form fidelity energy of a disc centred on a straight ink band of
//! half-width `R`, as a function of the disc radius `r`.
//!
//! For `r > R` the disc pokes out of the band by two circular segments with
//! central angle `θ = 2·arccos(R/r)`, whose white area is `(θ − sin θ)·r²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandModel {
    /// True writing radius `R`.
    pub r_true: f64,
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
}

impl BandModel {
    pub fn new(r_true: f64, c1: f64, c2: f64, alpha: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(r_true) && ok(c1) && ok(c2) && ok(alpha)) {
            return Err(Error::InvalidParams(format!(
                "band model needs R, c1, c2, alpha > 0 (got R={r_true}, c1={c1}, c2={c2}, alpha={alpha})"
            )));
        }
        Ok(Self {
            r_true,
            c1,
            c2,
            alpha,
        })
    }

    /// Segment angle `θ`; zero inside the band.
    pub fn theta(&self, r: f64) -> f64 {
        if r <= self.r_true {
            0.0
        } else {
            2.0 * (self.r_true / r).acos()
        }
    }

    pub fn excess_area(&self, r: f64) -> f64 {
        let th = self.theta(r);
        (th - th.sin()) * r * r
    }

    /// `F_E(r) = c2·r^−α + c1·excess_area(r)/r²`.
    pub fn energy_profile(&self, r: f64) -> f64 {
        let th = self.theta(r);
        self.c2 * r.powf(-self.alpha) + self.c1 * (th - th.sin())
    }

    /// Analytic `dF_E/dr`. At `r = R` both one-sided limits equal the
    /// power-law branch, so the sub-band formula is used there.
    pub fn profile_derivative(&self, r: f64) -> f64 {
        let power = -self.c2 * self.alpha * r.powf(-self.alpha - 1.0);
        if r <= self.r_true {
            return power;
        }
        self.derivative_above(r)
    }

    /// The `r > R` branch evaluated anywhere `r ≥ R`, for one-sided checks.
    pub fn derivative_above(&self, r: f64) -> f64 {
        let big_r = self.r_true;
        let s = (1.0 - (big_r / r).powi(2)).max(0.0).sqrt();
        4.0 * self.c1 * big_r * s / (r * r) - self.c2 * self.alpha * r.powf(-self.alpha - 1.0)
    }

    /// Numeric minimiser of `energy_profile` over `[R·1.0001, 20R]`: a dense
    /// grid scan followed by golden-section refinement around the best cell.
    /// Uses function values only, so it can referee the analytic derivative.
    pub fn grid_minimizer(&self) -> f64 {
        const GRID: usize = 100_000;
        let lo = self.r_true * 1.0001;
        let hi = self.r_true * 20.0;
        let h = (hi - lo) / (GRID - 1) as f64;
        let at = |i: usize| lo + h * i as f64;
        let best = (0..GRID)
            .min_by(|&a, &b| self.energy_profile(at(a)).total_cmp(&self.energy_profile(at(b))))
            .expect("non-empty grid");
        let a = at(best.saturating_sub(1));
        let b = at((best + 1).min(GRID - 1));
        golden_section(|r| self.energy_profile(r), a, b, 1e-12)
    }

    /// `(r, F_E, dF_E/dr)` rows on an even grid, for plotting.
    pub fn sample(&self, r_lo: f64, r_hi: f64, count: usize) -> Result<Vec<[f64; 3]>> {
        if !(r_lo > 0.0 && r_hi > r_lo && count >= 2) {
            return Err(Error::InvalidParams(format!(
                "profile range needs 0 < r_lo < r_hi and at least 2 samples (got {r_lo}..{r_hi}, {count})"
            )));
        }
        let h = (r_hi - r_lo) / (count - 1) as f64;
        Ok((0..count)
            .map(|i| {
                let r = r_lo + h * i as f64;
                [r, self.energy_profile(r), self.profile_derivative(r)]
            })
            .collect())
    }

    /// CSV with header `r,f_e,df_e_dr`.
    pub fn csv(&self, r_lo: f64, r_hi: f64, count: usize) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["r", "f_e", "df_e_dr"])?;
        for row in self.sample(r_lo, r_hi, count)? {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Minimum of a unimodal `f` on `[a, b]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (1.0 + a.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
