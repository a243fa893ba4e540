//! Virtual CCD imaging: ideal position histograms of ensemble snapshots.
//!
//! Pictures are taken from above, looking along the wire (`Top`), and from
//! the side, looking perpendicular onto the wire (`Side`). Imaging is an
//! idealized histogram of projected positions; an optional seeded per-pixel
//! Poisson resampling stage adds shot-noise realism for figures.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::analysis::Profile;
use crate::ensemble::EnsembleSnapshot;
use crate::error::ImagingError;

/// Camera orientation with respect to the default lab geometry
/// (wire along x̂, gravity −ẑ).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum View {
    /// Looking along the wire axis; image plane (u, v) = (y, z).
    Top,
    /// Looking perpendicular to the wire; image plane (u, v) = (x, z).
    Side,
}

impl View {
    fn project(self, p: &Vector3<f64>) -> (f64, f64) {
        match self {
            View::Top => (p.y, p.z),
            View::Side => (p.x, p.z),
        }
    }
}

/// 2D histogram of projected atom positions.
///
/// Counts are stored row-major with `v` as the row coordinate:
/// `counts[iv * width + iu]`. Pixel (0, 0) covers the square with lower-left
/// corner at `origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct CcdImage {
    pub view: View,
    pub width: usize,
    pub height: usize,
    pub counts: Vec<u32>,
    /// Pixel edge length (m).
    pub pixel_size: f64,
    /// Realized field of view (m × m), `(width, height) * pixel_size`.
    pub fov: (f64, f64),
    /// (u, v) of the lower-left corner of pixel (0, 0) (m).
    pub origin: (f64, f64),
}

impl CcdImage {
    pub fn total_counts(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    pub fn at(&self, iu: usize, iv: usize) -> u32 {
        self.counts[iv * self.width + iu]
    }

    /// Center coordinate of column `iu`.
    pub fn u_center(&self, iu: usize) -> f64 {
        self.origin.0 + (iu as f64 + 0.5) * self.pixel_size
    }

    /// Center coordinate of row `iv`.
    pub fn v_center(&self, iv: usize) -> f64 {
        self.origin.1 + (iv as f64 + 0.5) * self.pixel_size
    }
}

/// Histogram the snapshot's projected positions into a camera image centered
/// on the coordinate origin. Atoms outside the field of view are excluded.
pub fn render_ccd(
    snapshot: &EnsembleSnapshot,
    view: View,
    fov: (f64, f64),
    pixel_size: f64,
) -> Result<CcdImage, ImagingError> {
    if !(pixel_size > 0.0 && pixel_size.is_finite()) {
        return Err(ImagingError::NonPositivePixelSize(pixel_size));
    }
    let width = (fov.0 / pixel_size).round() as isize;
    let height = (fov.1 / pixel_size).round() as isize;
    if width < 1 || height < 1 {
        return Err(ImagingError::FovTooSmall { fov, pixel_size });
    }
    let (width, height) = (width as usize, height as usize);
    let origin = (
        -(width as f64) * pixel_size / 2.0,
        -(height as f64) * pixel_size / 2.0,
    );
    let mut counts = vec![0u32; width * height];
    for state in &snapshot.states {
        let (u, v) = view.project(&state.position);
        let iu = ((u - origin.0) / pixel_size).floor();
        let iv = ((v - origin.1) / pixel_size).floor();
        if iu >= 0.0 && iv >= 0.0 && (iu as usize) < width && (iv as usize) < height {
            counts[(iv as usize) * width + iu as usize] += 1;
        }
    }
    Ok(CcdImage {
        view,
        width,
        height,
        counts,
        pixel_size,
        fov: (width as f64 * pixel_size, height as f64 * pixel_size),
        origin,
    })
}

/// Axis a profile runs along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileAxis {
    U,
    V,
}

/// Integrate the image along one axis, yielding the projection onto the
/// other. Total counts are preserved exactly.
pub fn project_profile(image: &CcdImage, axis: ProfileAxis) -> Profile {
    match axis {
        ProfileAxis::U => {
            let mut values = vec![0.0; image.width];
            for iv in 0..image.height {
                for iu in 0..image.width {
                    values[iu] += image.at(iu, iv) as f64;
                }
            }
            Profile {
                coordinates: (0..image.width).map(|iu| image.u_center(iu)).collect(),
                values,
            }
        }
        ProfileAxis::V => {
            let mut values = vec![0.0; image.height];
            for iv in 0..image.height {
                for iu in 0..image.width {
                    values[iv] += image.at(iu, iv) as f64;
                }
            }
            Profile {
                coordinates: (0..image.height).map(|iv| image.v_center(iv)).collect(),
                values,
            }
        }
    }
}

/// Cut through the image center: the profile along u summed over a band of
/// `band` rows centered on v = 0.
pub fn central_cut(image: &CcdImage, band: usize) -> Profile {
    let iv0 = ((-image.origin.1) / image.pixel_size).floor() as isize;
    let half = (band.max(1) as isize - 1) / 2;
    let lo = (iv0 - half).clamp(0, image.height as isize - 1) as usize;
    let hi = (iv0 + half).clamp(0, image.height as isize - 1) as usize;
    let mut values = vec![0.0; image.width];
    for iv in lo..=hi {
        for iu in 0..image.width {
            values[iu] += image.at(iu, iv) as f64;
        }
    }
    Profile {
        coordinates: (0..image.width).map(|iu| image.u_center(iu)).collect(),
        values,
    }
}

/// Replace every pixel count with a Poisson draw of the same mean
/// (shot-noise realism). Deterministic for a fixed seed.
pub fn poisson_resample(image: &CcdImage, seed: u64) -> CcdImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = image
        .counts
        .iter()
        .map(|&c| {
            if c == 0 {
                0
            } else {
                let draw: f64 = Poisson::new(c as f64).expect("positive mean").sample(&mut rng);
                draw.round().min(u32::MAX as f64) as u32
            }
        })
        .collect();
    CcdImage {
        counts,
        ..image.clone()
    }
}

/// Serialize as a binary 16-bit portable graymap (P5, maxval 65535,
/// big-endian, rows top to bottom). Header comments carry the artifact
/// version, master seed and the camera metadata. Counts above 65535 are
/// clipped.
pub fn to_pgm_bytes(image: &CcdImage, artifact_version: &str, master_seed: u64) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + 2 * image.counts.len());
    out.extend_from_slice(b"P5\n");
    out.extend_from_slice(format!("# wireguide {artifact_version} seed={master_seed}\n").as_bytes());
    out.extend_from_slice(
        format!(
            "# view={:?} pixel_size_m={} fov_u_m={} fov_v_m={} origin_u_m={} origin_v_m={}\n",
            image.view, image.pixel_size, image.fov.0, image.fov.1, image.origin.0, image.origin.1
        )
        .as_bytes(),
    );
    out.extend_from_slice(format!("{} {}\n65535\n", image.width, image.height).as_bytes());
    for iv in (0..image.height).rev() {
        for iu in 0..image.width {
            let c = image.at(iu, iv).min(65_535) as u16;
            out.extend_from_slice(&c.to_be_bytes());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{AtomState, Outcome, OutcomeKind};
    use crate::species::{AtomSpecies, Seeker};
    use rand::Rng;

    fn snapshot_of(positions: Vec<Vector3<f64>>) -> EnsembleSnapshot {
        let n = positions.len();
        EnsembleSnapshot {
            time: 0.0,
            states: positions
                .into_iter()
                .map(|p| {
                    AtomState::new(
                        AtomSpecies::lithium7(Seeker::HighField),
                        p,
                        Vector3::zeros(),
                    )
                })
                .collect(),
            outcome_tags: vec![
                Outcome {
                    kind: OutcomeKind::Guided,
                    exit_time: 0.0
                };
                n
            ],
            flagged: vec![false; n],
        }
    }

    #[test]
    fn single_atom_lands_in_central_pixel() {
        let snap = snapshot_of(vec![Vector3::zeros()]);
        // Odd pixel count keeps a pixel centered on the origin.
        let img = render_ccd(&snap, View::Top, (1.05e-2, 1.05e-2), 50.0e-6).unwrap();
        assert_eq!(img.total_counts(), 1);
        let iu = img.width / 2;
        let iv = img.height / 2;
        assert_eq!(img.at(iu, iv), 1);
    }

    #[test]
    fn atoms_outside_fov_are_excluded() {
        let snap = snapshot_of(vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(0.0, 2.0e-2, 0.0),
            Vector3::new(0.3, 0.0, 1.0e-3),
        ]);
        let img = render_ccd(&snap, View::Top, (1.0e-2, 1.0e-2), 50.0e-6).unwrap();
        assert_eq!(img.total_counts(), 2); // x is projected out in Top view
    }

    #[test]
    fn uniform_cloud_is_uniform_within_poisson() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let n = 200_000;
        let positions: Vec<Vector3<f64>> = (0..n)
            .map(|_| {
                Vector3::new(
                    0.0,
                    (rng.random::<f64>() - 0.5) * 1.0e-2,
                    (rng.random::<f64>() - 0.5) * 1.0e-2,
                )
            })
            .collect();
        let img = render_ccd(&snapshot_of(positions), View::Top, (1.0e-2, 1.0e-2), 1.0e-3).unwrap();
        let mean = n as f64 / (img.width * img.height) as f64;
        for &c in &img.counts {
            assert!(
                ((c as f64) - mean).abs() < 5.0 * mean.sqrt(),
                "pixel count {c} too far from mean {mean}"
            );
        }
    }

    #[test]
    fn projection_preserves_totals() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let positions: Vec<Vector3<f64>> = (0..5000)
            .map(|_| {
                Vector3::new(
                    0.0,
                    (rng.random::<f64>() - 0.5) * 2.0e-2,
                    (rng.random::<f64>() - 0.5) * 2.0e-2,
                )
            })
            .collect();
        let img = render_ccd(&snapshot_of(positions), View::Top, (1.0e-2, 1.0e-2), 0.5e-3).unwrap();
        let pu = project_profile(&img, ProfileAxis::U);
        let pv = project_profile(&img, ProfileAxis::V);
        assert_eq!(pu.total(), img.total_counts() as f64);
        assert_eq!(pv.total(), img.total_counts() as f64);
    }

    #[test]
    fn symmetric_cloud_gives_symmetric_profile() {
        // Mirror pairs bin into mirrored pixels exactly.
        let mut positions = Vec::new();
        for k in 1..40 {
            let y = k as f64 * 1.07e-4;
            positions.push(Vector3::new(0.0, y, 0.0));
            positions.push(Vector3::new(0.0, -y, 0.0));
        }
        let img = render_ccd(&snapshot_of(positions), View::Top, (1.0e-2, 1.0e-2), 1.0e-4).unwrap();
        let p = project_profile(&img, ProfileAxis::U);
        let n = p.values.len();
        for i in 0..n / 2 {
            assert_eq!(p.values[i], p.values[n - 1 - i], "asymmetry at bin {i}");
        }
    }

    #[test]
    fn central_cut_covers_requested_band() {
        let snap = snapshot_of(vec![
            Vector3::new(0.0, 1.0e-3, 10.0e-6),
            Vector3::new(0.0, 1.0e-3, -10.0e-6),
            Vector3::new(0.0, 1.0e-3, 3.0e-3), // far off the cut
        ]);
        let img = render_ccd(&snap, View::Top, (1.0e-2, 1.0e-2), 1.0e-4).unwrap();
        let cut = central_cut(&img, 3);
        assert_eq!(cut.values.iter().sum::<f64>(), 2.0);
    }

    #[test]
    fn rejects_bad_pixel_size() {
        let snap = snapshot_of(vec![]);
        assert!(render_ccd(&snap, View::Top, (1.0e-2, 1.0e-2), 0.0).is_err());
        assert!(render_ccd(&snap, View::Top, (1.0e-5, 1.0e-5), 1.0e-3).is_err());
    }

    #[test]
    fn pgm_layout_is_as_documented() {
        let snap = snapshot_of(vec![Vector3::new(0.0, -1.5e-3, 1.5e-3)]);
        let img = render_ccd(&snap, View::Top, (4.0e-3, 4.0e-3), 1.0e-3).unwrap();
        assert_eq!((img.width, img.height), (4, 4));
        // Atom sits in column 0..? u = −1.5 mm → iu = 0; v = +1.5 mm → iv = 3.
        assert_eq!(img.at(0, 3), 1);
        let bytes = to_pgm_bytes(&img, "0.0.0", 9);
        let header_end = bytes
            .windows(6)
            .position(|w| w == b"65535\n")
            .map(|p| p + 6)
            .unwrap();
        let text = std::str::from_utf8(&bytes[..header_end]).unwrap();
        assert!(text.starts_with("P5\n"));
        assert!(text.contains("seed=9"));
        assert!(text.contains("4 4"));
        let pixels = &bytes[header_end..];
        assert_eq!(pixels.len(), 4 * 4 * 2);
        // Rows are written top (highest v) first, big-endian u16: the atom at
        // (iu=0, iv=3) is the first pixel pair.
        assert_eq!(&pixels[0..2], &[0u8, 1u8]);
        assert_eq!(pixels[2..].iter().map(|&b| b as u64).sum::<u64>(), 0);
    }

    #[test]
    fn poisson_resample_is_seeded_and_mean_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let positions: Vec<Vector3<f64>> = (0..100_000)
            .map(|_| {
                Vector3::new(
                    0.0,
                    (rng.random::<f64>() - 0.5) * 1.0e-2,
                    (rng.random::<f64>() - 0.5) * 1.0e-2,
                )
            })
            .collect();
        let img = render_ccd(&snapshot_of(positions), View::Top, (1.0e-2, 1.0e-2), 2.0e-3).unwrap();
        let a = poisson_resample(&img, 1);
        let b = poisson_resample(&img, 1);
        assert_eq!(a, b);
        let c = poisson_resample(&img, 2);
        assert_ne!(a, c);
        let total = img.total_counts() as f64;
        assert!(((a.total_counts() as f64) - total).abs() < 5.0 * total.sqrt());
    }
}
