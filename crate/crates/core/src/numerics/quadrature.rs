//! Cumulative quadrature on a uniform grid.

use super::ode::TimeGrid;

/// Running integral `I(t) = ∫_{t0}^t g(s) ds` tabulated on the grid nodes.
#[derive(Debug, Clone)]
pub struct CumulativeIntegral {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    integrand: Vec<f64>,
}

impl CumulativeIntegral {
    /// Integrates pre-tabulated samples on uniform `times` with spacing `h`.
    pub fn from_samples(times: Vec<f64>, integrand: Vec<f64>, h: f64) -> Self {
        let values = cumulative_simpson(&integrand, h);
        Self {
            times,
            values,
            integrand,
        }
    }

    pub fn total(&self) -> f64 {
        *self.values.last().unwrap_or(&0.0)
    }

    /// Cubic Hermite interpolation between nodes, using the integrand as the
    /// slope. Outside the grid the end values are extended linearly.
    pub fn at(&self, t: f64) -> f64 {
        let n = self.times.len();
        if n == 1 {
            return self.values[0];
        }
        let t0 = self.times[0];
        let h = self.times[1] - t0;
        if t <= t0 {
            return self.values[0] + self.integrand[0] * (t - t0);
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1] + self.integrand[n - 1] * (t - self.times[n - 1]);
        }
        let k = (((t - t0) / h).floor() as usize).min(n - 2);
        let width = self.times[k + 1] - self.times[k];
        let s = (t - self.times[k]) / width;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.values[k]
            + h10 * width * self.integrand[k]
            + h01 * self.values[k + 1]
            + h11 * width * self.integrand[k + 1]
    }
}

/// Composite Simpson cumulative integral of `g` over the grid nodes. Odd
/// nodes use the third-order partial-panel rule, so every tabulated value
/// carries an `O(h^4)` error.
pub fn quadrature_accumulate<G>(g: G, grid: &TimeGrid) -> CumulativeIntegral
where
    G: Fn(f64) -> f64,
{
    let times = grid.nodes();
    let f: Vec<f64> = times.iter().map(|&t| g(t)).collect();
    let values = cumulative_simpson(&f, grid.step());
    CumulativeIntegral {
        times,
        values,
        integrand: f,
    }
}

/// Cumulative Simpson over uniformly spaced samples `f` with spacing `h`.
pub fn cumulative_simpson(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * h * (f[0] + f[1]);
        return out;
    }
    for k in 1..n {
        out[k] = if k % 2 == 0 {
            out[k - 2] + h / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k])
        } else if k + 1 < n {
            out[k - 1] + h / 12.0 * (5.0 * f[k - 1] + 8.0 * f[k] - f[k + 1])
        } else {
            out[k - 1] + h / 12.0 * (-f[k - 2] + 8.0 * f[k - 1] + 5.0 * f[k])
        };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_linear() {
        let grid = TimeGrid::fixed(0.0, 3.0, 31).unwrap();
        let one = quadrature_accumulate(|_| 1.0, &grid);
        for (t, v) in one.times.iter().zip(&one.values) {
            assert!((v - t).abs() < 1e-13);
        }
        let lin = quadrature_accumulate(|s| s, &grid);
        for (t, v) in lin.times.iter().zip(&lin.values) {
            assert!((v - t * t / 2.0).abs() < 1e-10);
        }
        assert!((lin.at(1.2345) - 1.2345f64.powi(2) / 2.0).abs() < 1e-10);
    }

    #[test]
    fn antisymmetric_vanishes() {
        let grid = TimeGrid::fixed(-2.0, 2.0, 200).unwrap();
        let q = quadrature_accumulate(|s| s.powi(3) * (s * s).cos() + s.sin(), &grid);
        assert!(q.total().abs() < 1e-12);
    }

    #[test]
    fn fourth_order_convergence() {
        let exact = 1.0 - 2f64.cos();
        let err = |n| {
            let grid = TimeGrid::fixed(0.0, 2.0, n).unwrap();
            (quadrature_accumulate(f64::sin, &grid).total() - exact).abs()
        };
        // odd step counts exercise the partial panel
        let ratio = err(21) / err(41);
        assert!(ratio > 12.0, "ratio {ratio}");
    }
}
