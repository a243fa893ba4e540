//! Quantitative analyses of the guided clouds: projected profiles,
//! difference profiles, detected-fraction decay, ring/unimodal expansion
//! classification, and the position-vs-current regression of the side guide.

use libm::erf;
use nalgebra::Vector3;

use crate::constants::STANDARD_GRAVITY;
use crate::ensemble::{tag_counts_as_guided, EnsembleSnapshot};
use crate::error::AnalysisError;

/// 1D projection of a density distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    /// Bin-center coordinates (m), strictly increasing.
    pub coordinates: Vec<f64>,
    /// Counts per bin (negative values arise in difference profiles).
    pub values: Vec<f64>,
}

impl Profile {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.coordinates.is_empty() {
            return Err(AnalysisError::EmptyProfile);
        }
        if self.coordinates.len() != self.values.len()
            || self.coordinates.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(AnalysisError::GridMismatch);
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Bin spacing, assuming a uniform grid.
    pub fn bin_width(&self) -> f64 {
        if self.coordinates.len() < 2 {
            return 0.0;
        }
        self.coordinates[1] - self.coordinates[0]
    }

    /// Index of the bin whose center is closest to `x`.
    pub fn nearest_bin(&self, x: f64) -> usize {
        self.coordinates
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (*a - x).abs().partial_cmp(&(*b - x).abs()).expect("finite")
            })
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

/// Pointwise difference `with − without` of two profiles on the same grid.
pub fn difference_profile(with: &Profile, without: &Profile) -> Result<Profile, AnalysisError> {
    with.validate()?;
    without.validate()?;
    if with.coordinates.len() != without.coordinates.len()
        || with
            .coordinates
            .iter()
            .zip(&without.coordinates)
            .any(|(a, b)| (a - b).abs() > 1.0e-12)
    {
        return Err(AnalysisError::GridMismatch);
    }
    Ok(Profile {
        coordinates: with.coordinates.clone(),
        values: with
            .values
            .iter()
            .zip(&without.values)
            .map(|(a, b)| a - b)
            .collect(),
    })
}

/// One point of the detected-fraction decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectedFractionPoint {
    pub time: f64,
    /// Guided-tagged atoms inside the axial field of view over all launched
    /// atoms.
    pub fraction: f64,
    /// Binomial Monte Carlo standard error.
    pub standard_error: f64,
}

/// Fraction of guided atoms still inside the illuminated section of the
/// wire, per snapshot. The field of view spans `fov_length` along `axis`,
/// centered on the origin.
pub fn detected_fraction(
    snapshots: &[EnsembleSnapshot],
    fov_length: f64,
    axis: &Vector3<f64>,
    count_flagged_as_lost: bool,
) -> Vec<DetectedFractionPoint> {
    snapshots
        .iter()
        .map(|snap| {
            let total = snap.len();
            let detected = (0..total)
                .filter(|&i| {
                    tag_counts_as_guided(snap.outcome_tags[i].kind, count_flagged_as_lost)
                        && snap.states[i].position.dot(axis).abs() <= fov_length / 2.0
                })
                .count();
            let fraction = detected as f64 / total.max(1) as f64;
            DetectedFractionPoint {
                time: snap.time,
                fraction,
                standard_error: (fraction * (1.0 - fraction) / total.max(1) as f64).sqrt(),
            }
        })
        .collect()
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

/// Closed-form in-view probability for a freely expanding axial Gaussian:
/// x(t) = x₀ + v·t with x₀ ~ N(center, σ_x²), v ~ N(0, σ_v²), inside
/// [−L/2, L/2].
pub fn free_axial_inview_fraction(
    sigma_x: f64,
    sigma_v: f64,
    center: f64,
    fov_length: f64,
    t: f64,
) -> f64 {
    let sigma_t = (sigma_x * sigma_x + sigma_v * sigma_v * t * t).sqrt();
    let half = fov_length / 2.0;
    normal_cdf((half - center) / sigma_t) - normal_cdf((-half - center) / sigma_t)
}

/// In-view probability against gravity sag: z(t) = z₀ + v·t − ½g·t² inside
/// a vertical window of `fov_height` centered on the wire. Applies to
/// ensembles in free fall; guided atoms stay bound transversely.
pub fn gravity_sag_inview_fraction(
    sigma_z: f64,
    sigma_v: f64,
    fov_height: f64,
    t: f64,
) -> f64 {
    let sigma_t = (sigma_z * sigma_z + sigma_v * sigma_v * t * t).sqrt();
    let sag = 0.5 * STANDARD_GRAVITY * t * t;
    let half = fov_height / 2.0;
    normal_cdf((half + sag) / sigma_t) - normal_cdf((-half + sag) / sigma_t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingVerdict {
    Ring,
    Unimodal,
    Ambiguous,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingStatistic {
    /// 1 − central/max of the 3-bin-smoothed cut; 1 for a perfect annulus,
    /// 0 for a centered unimodal peak.
    pub dip: f64,
    pub verdict: RingVerdict,
}

const RING_THRESHOLD: f64 = 0.3;
const UNIMODAL_THRESHOLD: f64 = 0.1;

/// Doughnut-vs-Gaussian classification of a central cut through the
/// expanded top-view image.
pub fn ring_statistic(profile: &Profile) -> Result<RingStatistic, AnalysisError> {
    profile.validate()?;
    let n = profile.values.len();
    let smoothed: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            profile.values[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let peak = smoothed.iter().copied().fold(f64::NAN, f64::max);
    if !(peak > 0.0) {
        return Err(AnalysisError::ZeroSignal);
    }
    let central = smoothed[profile.nearest_bin(0.0)];
    let dip = 1.0 - central / peak;
    let verdict = if dip > RING_THRESHOLD {
        RingVerdict::Ring
    } else if dip < UNIMODAL_THRESHOLD {
        RingVerdict::Unimodal
    } else {
        RingVerdict::Ambiguous
    };
    Ok(RingStatistic { dip, verdict })
}

/// Ordinary least squares y = slope·x + intercept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Regression of measured side-guide positions against the wire current;
/// the slope is compared against μ₀/(2π·B_b).
pub fn fit_rs_vs_current(points: &[(f64, f64)]) -> Result<LinearFit, AnalysisError> {
    if points.len() < 3 {
        return Err(AnalysisError::TooFewPoints {
            needed: 3,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum::<f64>();
    let sxy = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum::<f64>();
    if sxx == 0.0 {
        return Err(AnalysisError::TooFewPoints {
            needed: 2,
            got: 1,
        });
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res = points
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).powi(2))
        .sum::<f64>();
    let ss_tot = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum::<f64>();
    let r_squared = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::MU0_OVER_2PI;
    use approx::assert_relative_eq;

    fn profile(coords: Vec<f64>, values: Vec<f64>) -> Profile {
        Profile {
            coordinates: coords,
            values,
        }
    }

    #[test]
    fn difference_of_identical_profiles_is_zero() {
        let p = profile(vec![0.0, 1.0, 2.0], vec![3.0, 4.0, 5.0]);
        let d = difference_profile(&p, &p).unwrap();
        assert!(d.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn difference_of_equal_totals_sums_to_zero_exactly() {
        // Integer-valued counts subtract exactly in f64.
        let a = profile(vec![0.0, 1.0, 2.0, 3.0], vec![10.0, 20.0, 5.0, 1.0]);
        let b = profile(vec![0.0, 1.0, 2.0, 3.0], vec![6.0, 14.0, 12.0, 4.0]);
        assert_eq!(a.total(), b.total());
        assert_eq!(difference_profile(&a, &b).unwrap().total(), 0.0);
    }

    #[test]
    fn difference_rejects_mismatched_grids() {
        let a = profile(vec![0.0, 1.0], vec![1.0, 2.0]);
        let b = profile(vec![0.0, 1.5], vec![1.0, 2.0]);
        assert!(matches!(
            difference_profile(&a, &b),
            Err(AnalysisError::GridMismatch)
        ));
    }

    #[test]
    fn ring_statistic_extremes() {
        // Perfect annulus: zero center, symmetric crests.
        let coords: Vec<f64> = (-10..=10).map(|i| i as f64 * 1e-3).collect();
        let annulus: Vec<f64> = (-10i32..=10)
            .map(|i| if i.abs() >= 5 && i.abs() <= 7 { 100.0 } else { 0.0 })
            .collect();
        let ring = ring_statistic(&profile(coords.clone(), annulus)).unwrap();
        assert_eq!(ring.verdict, RingVerdict::Ring);
        assert!(ring.dip > 0.99);

        let gaussian: Vec<f64> = (-10i32..=10)
            .map(|i| 100.0 * (-(i * i) as f64 / 18.0).exp())
            .collect();
        let uni = ring_statistic(&profile(coords, gaussian)).unwrap();
        assert_eq!(uni.verdict, RingVerdict::Unimodal);
        assert!(uni.dip < 0.05);
    }

    #[test]
    fn ring_statistic_rejects_empty_and_zero() {
        assert!(matches!(
            ring_statistic(&profile(vec![], vec![])),
            Err(AnalysisError::EmptyProfile)
        ));
        assert!(matches!(
            ring_statistic(&profile(vec![0.0, 1.0], vec![0.0, 0.0])),
            Err(AnalysisError::ZeroSignal)
        ));
    }

    #[test]
    fn regression_recovers_exact_line() {
        let b_b = 1.0e-3;
        let points: Vec<(f64, f64)> = [0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|&i| (i, MU0_OVER_2PI * i / b_b))
            .collect();
        let fit = fit_rs_vs_current(&points).unwrap();
        assert_relative_eq!(fit.slope, MU0_OVER_2PI / b_b, max_relative = 1e-12);
        assert!(fit.intercept.abs() < 1e-16);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_bias_halves_the_slope() {
        let mk = |b_b: f64| {
            let pts: Vec<(f64, f64)> = [0.25, 0.5, 0.75, 1.0]
                .iter()
                .map(|&i| (i, MU0_OVER_2PI * i / b_b))
                .collect();
            fit_rs_vs_current(&pts).unwrap().slope
        };
        assert_relative_eq!(mk(2.0e-3), mk(1.0e-3) / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn regression_needs_three_points() {
        assert!(fit_rs_vs_current(&[(0.0, 0.0), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn axial_inview_model_limits() {
        // Fully inside at t = 0 for a narrow cloud, decaying thereafter.
        let f0 = free_axial_inview_fraction(0.68e-3, 0.487, 0.0, 2.0e-2, 0.0);
        assert!(f0 > 0.999999);
        let f20 = free_axial_inview_fraction(0.68e-3, 0.487, 0.0, 2.0e-2, 20.0e-3);
        assert!(f20 < f0 && f20 > 0.5);
        // Kinematic decay scale: half-length / σ_v ≈ 20 ms.
        let f40 = free_axial_inview_fraction(0.68e-3, 0.487, 0.0, 2.0e-2, 40.0e-3);
        assert!(f40 < f20);
    }

    #[test]
    fn gravity_sag_reduces_vertical_fraction() {
        let early = gravity_sag_inview_fraction(0.68e-3, 0.487, 1.0e-2, 1.0e-3);
        let late = gravity_sag_inview_fraction(0.68e-3, 0.487, 1.0e-2, 50.0e-3);
        assert!(late < early);
    }
}
