use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use sop_core::bench::probe_customers;
use sop_core::instance::{generate_instance, GenConfig, Instance, WeightDist};

// Upper 0.1% points of the chi-square distribution.
const CHI2_999_DF9: f64 = 27.877;
const CHI2_999_DF15: f64 = 37.697;

fn chi_square(observed: &[u64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum()
}

#[test]
fn weights_have_mean_seven_within_bounds() {
    let dist = WeightDist::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 100_000;
    let mut sum = 0u64;
    for _ in 0..n {
        let w = dist.sample(&mut rng);
        assert!((1..=15).contains(&w));
        sum += w as u64;
    }
    let mean = sum as f64 / n as f64;
    assert!((mean - 7.0).abs() <= 0.2, "mean weight {mean}");
}

#[test]
fn preferred_windows_are_uniform() {
    let inst = generate_instance(&GenConfig {
        seed: 3,
        pool_size: 20_000,
        ..GenConfig::default()
    })
    .unwrap();
    let q = inst.windows.len();
    let mut counts = vec![0u64; q];
    for o in &inst.pool {
        counts[o.window.0 as usize] += 1;
    }
    let expected = vec![inst.pool.len() as f64 / q as f64; q];
    let chi = chi_square(&counts, &expected);
    assert!(chi < CHI2_999_DF9, "chi-square {chi} over {counts:?}");
}

/// Cell of a 4x4 partition of the grid.
fn cell(inst: &Instance, x: f64, y: f64) -> usize {
    let g = inst.config.grid_size as f64;
    let bin = |v: f64| ((v.clamp(0.0, g) / g * 4.0) as usize).min(3);
    bin(x) * 4 + bin(y)
}

/// Cell frequencies of the cluster mixture, sampled directly from the
/// instance's cluster parameters.
fn mixture_frequencies(inst: &Instance, samples: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xfeed);
    let g = inst.config.grid_size as f64;
    let unit = Normal::new(0.0, 1.0).unwrap();
    let mut counts = vec![0u64; 16];
    for _ in 0..samples {
        let (x, y) = if rng.gen::<f64>() < inst.config.clustered_fraction {
            let c = &inst.clusters[rng.gen_range(0..inst.clusters.len())];
            let (u, v) = (unit.sample(&mut rng) * c.sd.0, unit.sample(&mut rng) * c.sd.1);
            let (sin, cos) = c.angle.sin_cos();
            (c.center.0 + cos * u - sin * v, c.center.1 + sin * u + cos * v)
        } else {
            (rng.gen::<f64>() * g, rng.gen::<f64>() * g)
        };
        counts[cell(inst, x.round(), y.round())] += 1;
    }
    counts.iter().map(|&c| c as f64 / samples as f64).collect()
}

#[test]
fn probes_follow_the_cluster_mixture() {
    let inst = generate_instance(&GenConfig {
        seed: 21,
        pool_size: 100,
        vehicles: 2,
        ..GenConfig::default()
    })
    .unwrap();
    let schedule = inst.empty_schedule();
    let n = 10_000;
    let probes = probe_customers(&inst, &schedule, n, 99);
    let mut counts = vec![0u64; 16];
    for p in &probes {
        counts[cell(&inst, p.location.x as f64, p.location.y as f64)] += 1;
    }
    let expected: Vec<f64> = mixture_frequencies(&inst, 1_000_000).iter().map(|f| f * n as f64).collect();
    // Merge near-empty cells into their neighbour so every expected count
    // is at least 5.
    let (mut obs, mut exp) = (Vec::new(), Vec::new());
    let (mut o_acc, mut e_acc) = (0u64, 0.0);
    for (o, e) in counts.iter().zip(&expected) {
        o_acc += o;
        e_acc += e;
        if e_acc >= 5.0 {
            obs.push(o_acc);
            exp.push(e_acc);
            o_acc = 0;
            e_acc = 0.0;
        }
    }
    if let (Some(lo), Some(le)) = (obs.last_mut(), exp.last_mut()) {
        *lo += o_acc;
        *le += e_acc;
    }
    let chi = chi_square(&obs, &exp);
    assert!(obs.len() >= 8, "too few usable cells: {}", obs.len());
    assert!(chi < CHI2_999_DF15, "chi-square {chi}: observed {counts:?}");
}

#[test]
fn probes_never_reuse_ids() {
    let inst = generate_instance(&GenConfig {
        seed: 4,
        pool_size: 300,
        vehicles: 3,
        ..GenConfig::default()
    })
    .unwrap();
    let s = inst.empty_schedule();
    let probes = probe_customers(&inst, &s, 50, 1);
    let top = inst.pool.iter().map(|o| o.id).max().unwrap();
    assert!(probes.iter().all(|p| p.id > top));
    let mut ids: Vec<_> = probes.iter().map(|p| p.id).collect();
    ids.dedup();
    assert_eq!(ids.len(), 50);
}

#[test]
fn coordinates_stay_on_the_grid() {
    let inst = generate_instance(&GenConfig {
        seed: 8,
        pool_size: 5000,
        ..GenConfig::default()
    })
    .unwrap();
    let g = inst.config.grid_size;
    assert!(inst
        .pool
        .iter()
        .all(|o| (0..=g).contains(&o.location.x) && (0..=g).contains(&o.location.y)));
    assert_eq!(inst.clusters.len(), 15);
}
