//! One Buffon throw and the pi estimator built on it.
//!
//! A throw is described by the midpoint position `y` modulo the line spacing
//! and the angle `phi` between needle and lines. The needle crosses a line when
//! the midpoint's distance to the nearest line satisfies `x <= (l/2) sin(phi)`,
//! which for a short needle (`l <= a`) happens with probability `2l/(a pi)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::{stderr_proportion, EstimateSummary};
use crate::streams::UnitSource;

/// Floor ruled with parallel lines `spacing` apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FloorSpec {
    spacing: f64,
}

impl FloorSpec {
    pub fn new(spacing: f64) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidConfiguration(format!(
                "line spacing must be positive and finite, got {spacing}"
            )));
        }
        Ok(Self { spacing })
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeedleSpec {
    length: f64,
}

impl NeedleSpec {
    pub fn new(length: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidConfiguration(format!(
                "needle length must be positive and finite, got {length}"
            )));
        }
        Ok(Self { length })
    }

    pub fn length(&self) -> f64 {
        self.length
    }
}

/// A validated floor/needle pair in the short-needle regime (`l <= a`), where
/// a needle can cross at most one line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Board {
    floor: FloorSpec,
    needle: NeedleSpec,
}

impl Board {
    pub fn new(floor: FloorSpec, needle: NeedleSpec) -> Result<Self> {
        if needle.length > floor.spacing {
            return Err(Error::InvalidConfiguration(format!(
                "short-needle constraint violated: needle length {} exceeds line spacing {}",
                needle.length, floor.spacing
            )));
        }
        Ok(Self { floor, needle })
    }

    /// Convenience constructor from raw `(spacing, length)`.
    pub fn with_dims(spacing: f64, length: f64) -> Result<Self> {
        Self::new(FloorSpec::new(spacing)?, NeedleSpec::new(length)?)
    }

    pub fn floor(&self) -> FloorSpec {
        self.floor
    }

    pub fn needle(&self) -> NeedleSpec {
        self.needle
    }

    pub fn spacing(&self) -> f64 {
        self.floor.spacing
    }

    pub fn length(&self) -> f64 {
        self.needle.length
    }

    /// `2l/(a pi)`.
    pub fn crossing_probability(&self) -> f64 {
        2.0 * self.needle.length / (self.floor.spacing * PI)
    }

    /// Throws once. Draws `y` first, then `phi`.
    #[inline]
    pub fn throw<S: UnitSource + ?Sized>(&self, src: &mut S) -> Throw {
        let a = self.floor.spacing;
        let u = src.next_unit();
        let phi = src.next_unit() * PI;
        let y = u * a;
        let x = y.min(a - y);
        Throw {
            y,
            x,
            phi,
            crossed: crosses(x, phi, self.needle.length),
            u,
        }
    }

    /// Throws `n` times and counts crossings.
    pub fn tally<S: UnitSource + ?Sized>(&self, src: &mut S, n: u64) -> Tally {
        let m = (0..n).filter(|_| self.throw(src).crossed).count() as u64;
        Tally { n, m }
    }

    /// `2ln/(am)` as a float; `None` before the first crossing.
    #[inline]
    pub fn pi_point(&self, n: u64, m: u64) -> Option<f64> {
        (m > 0).then(|| 2.0 * self.needle.length * n as f64 / (self.floor.spacing * m as f64))
    }
}

/// One needle landing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Throw {
    /// Midpoint position modulo the spacing, in `[0, a)`.
    pub y: f64,
    /// Midpoint distance to the nearest line, `min(y, a - y)`.
    pub x: f64,
    /// Angle to the lines, in `[0, pi)`.
    pub phi: f64,
    pub crossed: bool,
    /// Midpoint offset as a fraction of the spacing, `y / a`, in `[0, 1)`.
    ///
    /// This is the raw draw that produced `y`, so it is bit-identical for any
    /// rescaling of the board.
    pub u: f64,
}

/// Throws and crossing counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub n: u64,
    pub m: u64,
}

impl Tally {
    pub fn new(n: u64, m: u64) -> Result<Self> {
        if m > n {
            return Err(Error::InvalidArgument(format!(
                "{m} crossings cannot exceed {n} throws"
            )));
        }
        Ok(Self { n, m })
    }

    #[inline]
    pub fn record(&mut self, crossed: bool) {
        self.n += 1;
        self.m += crossed as u64;
    }

    pub fn merge(&self, other: &Self) -> Self {
        Self {
            n: self.n + other.n,
            m: self.m + other.m,
        }
    }

    pub fn proportion(&self) -> Option<f64> {
        (self.n > 0).then(|| self.m as f64 / self.n as f64)
    }
}

/// Throws once after checking the short-needle constraint.
pub fn sample_throw<S: UnitSource + ?Sized>(
    src: &mut S,
    floor: FloorSpec,
    needle: NeedleSpec,
) -> Result<Throw> {
    Ok(Board::new(floor, needle)?.throw(src))
}

/// Crossing predicate `x <= (l/2) sin(phi)`; the boundary counts as a crossing.
#[inline]
pub fn crosses(x: f64, phi: f64, length: f64) -> bool {
    x <= 0.5 * length * phi.sin()
}

/// Analytic crossing probability `2l/(a pi)` for a short needle.
pub fn crossing_probability(floor: FloorSpec, needle: NeedleSpec) -> Result<f64> {
    Ok(Board::new(floor, needle)?.crossing_probability())
}

/// Estimates pi as `2ln/(am)`.
///
/// The standard error comes from the proportion's `sqrt(p(1-p)/n)` through the
/// delta method: `(2l/a) * se(p) / p^2`.
pub fn estimate_pi(tally: Tally, floor: FloorSpec, needle: NeedleSpec) -> Result<EstimateSummary> {
    let board = Board::new(floor, needle)?;
    board.estimate_pi(tally)
}

impl Board {
    pub fn estimate_pi(&self, tally: Tally) -> Result<EstimateSummary> {
        if tally.m > tally.n {
            return Err(Error::InvalidArgument(format!(
                "{} crossings cannot exceed {} throws",
                tally.m, tally.n
            )));
        }
        let point = self
            .pi_point(tally.n, tally.m)
            .ok_or(Error::NoCrossings { throws: tally.n })?;
        let p_hat = tally.m as f64 / tally.n as f64;
        let ratio = 2.0 * self.needle.length / self.floor.spacing;
        let stderr = ratio * stderr_proportion(p_hat, tally.n)? / (p_hat * p_hat);
        Ok(EstimateSummary::new(point, stderr, tally.n))
    }
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;
    use crate::streams::{Replay, StreamSpec};

    fn unit_board() -> Board {
        Board::with_dims(1.0, 1.0).unwrap()
    }

    /// Midpoint rule on `(1/(a pi)) * integral_0^pi l sin(phi) dphi`.
    fn quadrature_probability(a: f64, l: f64) -> f64 {
        let k = 200_000;
        let h = PI / k as f64;
        let integral: f64 = (0..k).map(|i| l * ((i as f64 + 0.5) * h).sin() * h).sum();
        integral / (a * PI)
    }

    #[test]
    fn boundary_equality_counts() {
        let mut src = Replay::new(vec![0.5, 0.5]);
        let t = unit_board().throw(&mut src);
        assert_eq!(t.y, 0.5);
        assert_eq!(t.phi, PI / 2.0);
        assert_eq!(t.x, 0.5);
        assert!(t.crossed);
        assert_eq!(src.consumed(), 2);
    }

    #[test]
    fn midpoint_on_a_line() {
        let mut src = Replay::new(vec![0.0, 0.3]);
        let t = unit_board().throw(&mut src);
        assert_eq!(t.x, 0.0);
        assert!(t.crossed);
    }

    #[test]
    fn draw_order_is_y_then_phi() {
        let board = Board::with_dims(2.0, 1.0).unwrap();
        let t = board.throw(&mut Replay::new(vec![0.25, 0.75]));
        assert_eq!(t.y, 0.5);
        assert_eq!(t.u, 0.25);
        assert_eq!(t.phi, 0.75 * PI);
    }

    #[test]
    fn crossing_predicate() {
        assert!(crosses(0.2, PI / 2.0, 1.0));
        assert!(!crosses(0.4, PI / 6.0, 1.0));
        assert!(crosses(0.0, 0.0, 1.0));
    }

    #[test]
    fn probability_matches_quadrature() {
        for &(a, l) in &[(1.0, 1.0), (2.0, 1.0), (6.0, 5.0)] {
            let p = Board::with_dims(a, l).unwrap().crossing_probability();
            assert!(
                (p - quadrature_probability(a, l)).abs() < 1e-9,
                "a={a} l={l}"
            );
        }
        let p = crossing_probability(FloorSpec::new(1.0).unwrap(), NeedleSpec::new(1.0).unwrap())
            .unwrap();
        assert!((p - 0.6366198).abs() < 1e-7);
        let p = crossing_probability(FloorSpec::new(2.0).unwrap(), NeedleSpec::new(1.0).unwrap())
            .unwrap();
        assert!((p - 0.3183099).abs() < 1e-7);
        let tiny = Board::with_dims(1.0, 1e-300)
            .unwrap()
            .crossing_probability();
        assert!(tiny < 1e-299);
    }

    #[test]
    fn long_needle_rejected() {
        let floor = FloorSpec::new(1.0).unwrap();
        let needle = NeedleSpec::new(2.0).unwrap();
        assert!(matches!(
            crossing_probability(floor, needle),
            Err(Error::InvalidConfiguration(_))
        ));
        let mut src = Replay::new(vec![0.1, 0.1]);
        assert!(sample_throw(&mut src, floor, needle).is_err());
        assert!(FloorSpec::new(0.0).is_err());
        assert!(NeedleSpec::new(-1.0).is_err());
        assert!(NeedleSpec::new(f64::NAN).is_err());
    }

    #[test]
    fn lazzarini_tally_gives_355_over_113() {
        let est = estimate_pi(
            Tally::new(3408, 1808).unwrap(),
            FloorSpec::new(6.0).unwrap(),
            NeedleSpec::new(5.0).unwrap(),
        )
        .unwrap();
        assert!((est.point - 355.0 / 113.0).abs() < 1e-12);
        assert!((est.point - 3.1415929).abs() < 1e-7);
    }

    #[test]
    fn all_cross() {
        let est = unit_board().estimate_pi(Tally::new(4, 4).unwrap()).unwrap();
        assert_eq!(est.point, 2.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn no_crossings_is_an_error() {
        assert_eq!(
            unit_board().estimate_pi(Tally::new(100, 0).unwrap()),
            Err(Error::NoCrossings { throws: 100 })
        );
        assert!(Tally::new(3, 4).is_err());
    }

    #[test]
    fn delta_method_stderr() {
        let board = unit_board();
        let est = board
            .estimate_pi(Tally::new(1_000_000, 636_620).unwrap())
            .unwrap();
        let p = 0.63662;
        let expected = 2.0 * (p * (1.0 - p) / 1e6f64).sqrt() / (p * p);
        assert!((est.stderr - expected).abs() < 1e-12);
        // near pi this is (pi^2/2) * sqrt(p(1-p)/n)
        assert!((est.stderr - 2.37e-3).abs() < 1e-5, "{}", est.stderr);
    }

    #[test]
    fn estimate_decreases_with_crossings() {
        let board = Board::with_dims(6.0, 5.0).unwrap();
        let mut prev = f64::INFINITY;
        for m in 1..=500 {
            let e = board.pi_point(500, m).unwrap();
            assert!(e < prev);
            prev = e;
        }
    }

    #[test]
    fn empirical_crossing_frequency() {
        let board = unit_board();
        let n = 1_000_000;
        let tally = board.tally(&mut StreamSpec::new(2024, 0).open(), n);
        let p = 2.0 / PI;
        let freq = tally.proportion().unwrap();
        assert!(
            (freq - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt(),
            "{freq}"
        );
    }

    #[test]
    fn offset_marginal_is_uniform() {
        let board = Board::with_dims(1.0, 0.7).unwrap();
        let mut src = StreamSpec::new(99, 0).open();
        let mut bins = [0u64; 10];
        for _ in 0..1_000_000 {
            bins[(board.throw(&mut src).u * 10.0) as usize] += 1;
        }
        for c in bins {
            assert!((c as f64 - 100_000.0).abs() <= 1500.0, "{c}");
        }
    }
}
