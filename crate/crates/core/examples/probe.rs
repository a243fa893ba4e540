// Scratch experiments for calibrating preset parameters. Not shipped logic.
use nalgebra::Vector3;
use wireguide::analysis::{detected_fraction, free_axial_inview_fraction, ring_statistic};
use wireguide::dynamics::IntegratorConfig;
use wireguide::ensemble::{
    filter_snapshot, loading_efficiency, run_sequence, EfficiencyCriterion, EfficiencyOptions,
    MotParams, SequenceSpec, SnapshotFilter,
};
use wireguide::field::BiasFieldSpec;
use wireguide::imaging::{central_cut, project_profile, render_ccd, ProfileAxis, View};
use wireguide::sidetrap::side_trap_center;
use wireguide::{AtomSpecies, FieldConfig, Seeker, WireSpec};

fn li7() -> AtomSpecies {
    AtomSpecies::lithium7(Seeker::HighField)
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "eff".into());
    match which.as_str() {
        "eff" => efficiencies(),
        "fig4" => fig4(),
        "fig5" => fig5(),
        "fig6" => fig6(),
        "fig3" => fig3(),
        _ => eprintln!("unknown probe"),
    }
}

fn efficiencies() {
    for (label, gravity, guide_time, domain) in [
        ("kepler g-on 20ms d=2cm", true, 20.0e-3, 2.0e-2),
        ("kepler g-off 20ms d=2cm", false, 20.0e-3, 2.0e-2),
        ("kepler g-off 40ms d=2cm", false, 40.0e-3, 2.0e-2),
        ("kepler g-off 60ms d=2cm", false, 60.0e-3, 2.0e-2),
    ] {
        let mut cfg = FieldConfig::kepler(WireSpec::with_current(1.0));
        cfg.gravity_on = gravity;
        let params = MotParams {
            atom_count: 4000,
            ..MotParams::default()
        };
        let seq = SequenceSpec {
            guide: cfg.clone(),
            guide_time,
            snapshot_times: vec![0.0, guide_time],
            free_expansion_time: 0.0,
            master_seed: 12345,
        };
        let icfg = IntegratorConfig {
            domain_radius: domain,
            ..IntegratorConfig::default()
        };
        let t0 = std::time::Instant::now();
        let snaps = run_sequence(&params, &li7(), &seq, &icfg).unwrap();
        let opts = EfficiencyOptions::default();
        let e = loading_efficiency(&snaps, EfficiencyCriterion::EnergyBased, &cfg, &opts).unwrap();
        let s = loading_efficiency(&snaps, EfficiencyCriterion::SurvivalBased, &cfg, &opts).unwrap();
        println!(
            "{label}: energy {:.4}±{:.4}  survival {:.4}±{:.4}  diff/SE {:.2}  [{:?}]",
            e.fraction,
            e.standard_error,
            s.fraction,
            s.standard_error,
            (e.fraction - s.fraction).abs()
                / (e.standard_error.powi(2) + s.standard_error.powi(2)).sqrt(),
            t0.elapsed()
        );
    }

    // Side guide at 10 G.
    for current in [0.5, 1.0] {
        let wire = WireSpec::with_current(current);
        let bias = BiasFieldSpec::new(1.0e-3, Vector3::z());
        let cfg = FieldConfig::side_guide(wire, bias).unwrap().with_gravity();
        let params = MotParams {
            atom_count: 4000,
            ..MotParams::default()
        };
        let seq = SequenceSpec {
            guide: cfg.clone(),
            guide_time: 20.0e-3,
            snapshot_times: vec![0.0, 20.0e-3],
            free_expansion_time: 0.0,
            master_seed: 777,
        };
        let icfg = IntegratorConfig::default();
        let snaps = run_sequence(&params, &li7(), &seq, &icfg).unwrap();
        let s = loading_efficiency(
            &snaps,
            EfficiencyCriterion::SurvivalBased,
            &cfg,
            &EfficiencyOptions::default(),
        )
        .unwrap();
        let flagged = snaps[1].flagged.iter().filter(|&&f| f).count();
        println!(
            "side {current} A 10 G: survival {:.4}±{:.4} flagged {}",
            s.fraction, s.standard_error, flagged
        );
        // Tighter capture radii.
        for cap in [1.0e-3, 0.5e-3] {
            let s2 = loading_efficiency(
                &snaps,
                EfficiencyCriterion::SurvivalBased,
                &cfg,
                &EfficiencyOptions {
                    capture_radius: cap,
                    ..EfficiencyOptions::default()
                },
            )
            .unwrap();
            println!("   capture {:.1} mm: {:.4}", cap * 1e3, s2.fraction);
        }
    }
}

fn fig4() {
    use wireguide::ensemble::kepler_bound;
    for gravity in [true, false] {
        let mut cfg = FieldConfig::kepler(WireSpec::with_current(1.0));
        cfg.gravity_on = gravity;
        let params = MotParams {
            atom_count: 6000,
            ..MotParams::default()
        };
        let times: Vec<f64> = (0..=12).map(|i| i as f64 * 3.0e-3).collect();
        let seq = SequenceSpec {
            guide: cfg.clone(),
            guide_time: 36.0e-3,
            snapshot_times: times.clone(),
            free_expansion_time: 0.0,
            master_seed: 4242,
        };
        let icfg = IntegratorConfig {
            domain_radius: 1.0e-2,
            ..IntegratorConfig::default()
        };
        let snaps = run_sequence(&params, &li7(), &seq, &icfg).unwrap();
        // Bound per conserved (E, L) at release, still guided, axially in view.
        let bound: Vec<bool> = snaps[0].states.iter().map(|s| kepler_bound(s, &cfg)).collect();
        let n = snaps[0].len() as f64;
        let f_bound = bound.iter().filter(|&&b| b).count() as f64 / n;
        let sx = params.position_sigma();
        let sv = params.velocity_sigma(li7().mass);
        println!("gravity={gravity} f_bound={f_bound:.4}");
        let mut worst_abs = 0.0f64;
        for snap in &snaps {
            let detected = (0..snap.len())
                .filter(|&i| {
                    bound[i]
                        && wireguide::ensemble::tag_counts_as_guided(snap.outcome_tags[i].kind, false)
                        && snap.states[i].position.x.abs() <= 1.0e-2
                })
                .count() as f64;
            let frac = detected / n;
            let se = (frac * (1.0 - frac) / n).sqrt();
            let model = f_bound * free_axial_inview_fraction(sx, sv, 0.0, 2.0e-2, snap.time);
            let dev = (frac - model) / se.max(1e-12);
            worst_abs = worst_abs.max(dev.abs());
            println!(
                "  t={:>4.0}ms sim={frac:.4} model={model:.4} dev/SE={dev:+.2}",
                snap.time * 1e3
            );
        }
        println!("  worst |dev|/SE = {worst_abs:.2}");
    }
}

fn fig5() {
    let bias = BiasFieldSpec::new(1.0e-3, Vector3::z());
    let mut pts = Vec::new();
    for &current in &[0.25, 0.5, 0.75, 1.0] {
        let wire = WireSpec::with_current(current);
        let trap = side_trap_center(&wire, &bias).unwrap();
        let cfg = FieldConfig::side_guide(wire, bias.clone()).unwrap().with_gravity();
        // Cold, small probe cloud overlapping the trap positions.
        let params = MotParams {
            atom_count: 24_000,
            center_offset: Vector3::new(0.0, -0.2e-3, 0.0),
            fwhm: 0.4e-3,
            temperature: 25.0e-6,
            seeker_fractions: wireguide::ensemble::SeekerFractions {
                high_field: 0.0,
                low_field: 1.0,
            },
        };
        let times: Vec<f64> = (0..=8).map(|i| 16.0e-3 + i as f64 * 1.0e-3).collect();
        let seq = SequenceSpec {
            guide: cfg.clone(),
            guide_time: 24.0e-3,
            snapshot_times: times,
            free_expansion_time: 0.0,
            master_seed: 999,
        };
        let snaps = run_sequence(&params, &li7(), &seq, &IntegratorConfig::default()).unwrap();
        // (s, z) displacements of guided atoms, pooled over late snapshots.
        let mut samples: Vec<(f64, f64)> = Vec::new();
        for snap in &snaps {
            let kept = filter_snapshot(snap, SnapshotFilter::Guided, false);
            for s in &kept.states {
                let disp = s.position - cfg.wire.axis_point;
                let vertical = disp.dot(&Vector3::z());
                let along = disp.dot(&trap.direction);
                if vertical.abs() < 0.3e-3 && (0.0..1.0e-3).contains(&along) {
                    samples.push((along, vertical));
                }
            }
        }
        // Pass 1: crude mode of s.
        let crude_mode = |data: &[(f64, f64)], zcut: f64, bin: f64| -> f64 {
            let nbins = (1.0e-3 / bin).ceil() as usize;
            let mut hist = vec![0.0f64; nbins];
            for &(s, z) in data {
                if z.abs() < zcut {
                    hist[((s / bin) as usize).min(nbins - 1)] += 1.0;
                }
            }
            let smooth: Vec<f64> = (0..nbins)
                .map(|i| {
                    let lo = i.saturating_sub(1);
                    let hi = (i + 2).min(nbins);
                    hist[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
                })
                .collect();
            let peak = (1..nbins.saturating_sub(1))
                .max_by(|&a, &b| smooth[a].partial_cmp(&smooth[b]).unwrap())
                .unwrap_or(0);
            let (ym, y0, yp) = (smooth[peak.saturating_sub(1)], smooth[peak], smooth[(peak + 1).min(nbins - 1)]);
            let denom = ym - 2.0 * y0 + yp;
            let frac = if denom.abs() > 1e-12 { (0.5 * (ym - yp) / denom).clamp(-0.5, 0.5) } else { 0.0 };
            (peak as f64 + 0.5 + frac) * bin
        };
        let s0 = crude_mode(&samples, 0.3e-3, 10.0e-6);
        // Pass 2: scale-aware refinement.
        let s1 = crude_mode(&samples, 0.3 * s0, (s0 / 15.0).max(2.0e-6));
        // Pass 3: symmetric core centroid around the refined mode.
        let core: Vec<f64> = samples
            .iter()
            .filter(|&&(s, z)| z.abs() < 0.3 * s1 && (s - s1).abs() < 0.25 * s1)
            .map(|&(s, _)| s)
            .collect();
        let centroid = core.iter().sum::<f64>() / core.len().max(1) as f64;
        println!(
            "I={current}: r_s={:.1}um n={} s0={:.1} s1={:.1} core_n={} centroid={:.2}um ({:+.2}%)",
            trap.distance * 1e6,
            samples.len(),
            s0 * 1e6,
            s1 * 1e6,
            core.len(),
            centroid * 1e6,
            (centroid / trap.distance - 1.0) * 100.0
        );
        pts.push((current, centroid));
    }
    let fit = wireguide::analysis::fit_rs_vs_current(&pts).unwrap();
    let expected = 2.0e-7 / 1.0e-3;
    println!(
        "slope {:.4e} vs {expected:.4e} ({:+.2}%), R² = {:.6}, intercept {:.2} um",
        fit.slope,
        (fit.slope / expected - 1.0) * 100.0,
        fit.r_squared,
        fit.intercept * 1e6
    );
}

fn fig6() {
    // Kepler ring after 9 ms expansion.
    for seed in [1u64, 2, 3] {
        let cfg = FieldConfig::kepler(WireSpec::with_current(1.0)).with_gravity();
        let params = MotParams {
            atom_count: 20_000,
            ..MotParams::default()
        };
        let seq = SequenceSpec {
            guide: cfg.clone(),
            guide_time: 20.0e-3,
            snapshot_times: vec![],
            free_expansion_time: 9.0e-3,
            master_seed: 1000 + seed,
        };
        let snaps = run_sequence(&params, &li7(), &seq, &IntegratorConfig::default()).unwrap();
        let kept = filter_snapshot(&snaps[0], SnapshotFilter::Guided, false);
        for pixel in [0.5e-3, 1.0e-3] {
            let img = render_ccd(&kept, View::Top, (2.0e-2, 2.0e-2), pixel).unwrap();
            let cut = central_cut(&img, 3);
            let stat = ring_statistic(&cut).unwrap();
            let proj = project_profile(&img, ProfileAxis::U);
            let pstat = ring_statistic(&proj).unwrap();
            println!(
                "kepler seed={seed} px={:.1}mm: kept={} cut dip={:.3} {:?} | proj dip={:.3} {:?}",
                pixel * 1e3,
                kept.len(),
                stat.dip,
                stat.verdict,
                pstat.dip,
                pstat.verdict
            );
        }
    }
    // Side guide after 7 ms expansion.
    for seed in [1u64, 2, 3] {
        for n in [20_000usize, 60_000] {
            let wire = WireSpec::with_current(1.0);
            let bias = BiasFieldSpec::new(1.0e-3, Vector3::z());
            let cfg = FieldConfig::side_guide(wire, bias).unwrap().with_gravity();
            let params = MotParams {
                atom_count: n,
                ..MotParams::default()
            };
            let seq = SequenceSpec {
                guide: cfg.clone(),
                guide_time: 20.0e-3,
                snapshot_times: vec![],
                free_expansion_time: 7.0e-3,
                master_seed: 2000 + seed,
            };
            let snaps = run_sequence(&params, &li7(), &seq, &IntegratorConfig::default()).unwrap();
            let kept = filter_snapshot(&snaps[0], SnapshotFilter::Guided, false);
            // Only side-trapped LFS atoms remain near the wire; restrict to
            // the vicinity before imaging like the camera's illuminated zone.
            for pixel in [0.5e-3, 1.0e-3] {
                let img = render_ccd(&kept, View::Top, (2.0e-2, 2.0e-2), pixel).unwrap();
                let cut = central_cut(&img, 3);
                match ring_statistic(&cut) {
                    Ok(stat) => println!(
                        "side seed={seed} n={n} px={:.1}mm: kept={} dip={:.3} {:?}",
                        pixel * 1e3,
                        kept.len(),
                        stat.dip,
                        stat.verdict
                    ),
                    Err(e) => println!("side seed={seed} n={n}: {e}"),
                }
            }
        }
    }
}

fn fig3() {
    let params = MotParams {
        atom_count: 10_000,
        ..MotParams::default()
    };
    let mk = |current: f64| {
        let cfg = FieldConfig::kepler(WireSpec::with_current(current)).with_gravity();
        let seq = SequenceSpec {
            guide: cfg.clone(),
            guide_time: 7.5e-3,
            snapshot_times: vec![7.5e-3],
            free_expansion_time: 0.0,
            master_seed: 31415,
        };
        run_sequence(&params, &li7(), &seq, &IntegratorConfig::default()).unwrap()
    };
    let with = mk(1.2);
    let without = mk(0.0);
    let render = |snaps: &[wireguide::EnsembleSnapshot]| {
        let kept = filter_snapshot(&snaps[0], SnapshotFilter::Guided, false);
        let img = render_ccd(&kept, View::Side, (2.0e-2, 1.0e-2), 50.0e-6).unwrap();
        project_profile(&img, ProfileAxis::V)
    };
    let p_with = render(&with);
    let p_without = render(&without);
    let diff = wireguide::analysis::difference_profile(&p_with, &p_without).unwrap();
    let fit = wireguide::fit::fit_double_gaussian(&p_with, None, &wireguide::fit::FitSettings::default())
        .unwrap();
    println!(
        "fit: conv={} a1={:.1} s1={:.3}mm a2={:.1} s2={:.3}mm c={:.2} deg={}",
        fit.converged,
        fit.narrow_amplitude,
        fit.narrow_sigma * 1e3,
        fit.wide_amplitude,
        fit.wide_sigma * 1e3,
        fit.offset,
        fit.degenerate
    );
    let center = diff.nearest_bin(0.0);
    let central: f64 = diff.values[center.saturating_sub(3)..(center + 4).min(diff.values.len())]
        .iter()
        .sum();
    let min = diff.values.iter().copied().fold(f64::INFINITY, f64::min);
    println!("difference: central sum {central:.1}, min {min:.1}, total {:.1}", diff.total());
}
