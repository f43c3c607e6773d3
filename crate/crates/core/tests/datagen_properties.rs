use opsplit::datagen::io::{decode_trajectory, encode_trajectory, read_header, read_trajectory, write_trajectory};
use opsplit::datagen::{
    generate_benchmark, init_clustered_gaussians, init_fourier_mix, init_fractaloid, Benchmark, GenerateConfig,
};
use opsplit::error::{Error, FormatError};
use opsplit::field::forward_transform;
use opsplit::identify::{identify_parameters, nrmse};
use opsplit::physics::{grayscott_flow, Coeff, GrayScott, SolverConfig, GS_DIFFUSION_A, GS_DIFFUSION_B};
use opsplit::{build_dictionary, DictionarySpec, Field, Grid, OperatorSubset, Scheme, Trajectory};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn short(benchmark: Benchmark, seed: u64) -> GenerateConfig {
    let mu = match benchmark {
        Benchmark::AdvDiff => [(Coeff::C, 0.4), (Coeff::D, 0.05)].into(),
        Benchmark::Combined => [(Coeff::Alpha, 0.5), (Coeff::D, 0.1), (Coeff::Gamma, 0.2)].into(),
        Benchmark::GrayScott => [(Coeff::F, 0.04), (Coeff::K, 0.06)].into(),
        Benchmark::NavierStokes => [(Coeff::Nu, 1e-3)].into(),
    };
    let mut cfg = GenerateConfig::preset(benchmark, mu, seed);
    cfg.frames = 4;
    cfg.horizon = 4.0 * benchmark.frame_dt();
    if benchmark == Benchmark::GrayScott {
        cfg.grid = Grid::square(16, 2.0).unwrap();
        cfg.init.kind = opsplit::datagen::InitKind::ClusteredGaussians { clusters: 2, warm_up: 5.0 };
    }
    if benchmark == Benchmark::NavierStokes {
        cfg.grid = Grid::square(16, 2.0 * std::f64::consts::PI).unwrap();
    }
    cfg
}

#[test]
fn every_benchmark_is_seed_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for b in Benchmark::ALL {
        let cfg = short(b, 3);
        let t = generate_benchmark(&cfg).unwrap();
        assert_eq!(t, generate_benchmark(&cfg).unwrap(), "{b}");
        assert_ne!(t.frames()[0], generate_benchmark(&short(b, 4)).unwrap().frames()[0], "{b}");
        let path = dir.path().join(format!("{b}.opstraj"));
        write_trajectory(&path, &t).unwrap();
        assert_eq!(read_trajectory(&path).unwrap(), t);
        let h = read_header(&path).unwrap();
        assert_eq!(h.generator, b.name());
        assert_eq!(h.mu, t.mu);
        assert!(h.solver.contains_key("scheme"));
    }
}

#[test]
fn diffusion_decays_every_mode() {
    let mut cfg = GenerateConfig::preset(Benchmark::AdvDiff, [(Coeff::D, 0.2)].into(), 8);
    cfg.frames = 10;
    let t = generate_benchmark(&cfg).unwrap();
    let spectra: Vec<_> = t.frames().iter().map(|f| forward_transform(f).unwrap()).collect();
    for w in spectra.windows(2) {
        for (a, b) in w[0].coeffs().iter().zip(w[1].coeffs()) {
            assert!(b.norm() <= a.norm() * (1.0 + 1e-12) + 1e-12);
        }
    }
}

/// Noise on the homogeneous fixed point `(A, B) = (1/2, 1/5)` of `F = 0.04`,
/// `k = 0.06` grows into a pattern.
#[test]
fn grayscott_forms_patterns() {
    let g = Grid::square(64, 2.0).unwrap();
    let p = GrayScott { d_a: GS_DIFFUSION_A, d_b: GS_DIFFUSION_B, delta: 1.0, feed: 0.04, kill: 0.06 };
    for seed in 0..3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = g.len();
        let values = (0..2 * n)
            .map(|i| if i < n { 0.5 } else { 0.2 } + 0.01 * rng.random_range(-1.0..1.0))
            .collect();
        let u0 = Field::new(g, 2, values).unwrap();
        let u = grayscott_flow(&u0, &p, 50.0, &SolverConfig::default()).unwrap();
        let (v0, v1) = (u0.variance(1), u.variance(1));
        assert!(v1 > 10.0 * v0, "seed {seed}: variance of B {v0:e} -> {v1:e}");
    }
}

#[test]
fn missing_trailer_is_truncation() {
    let t = generate_benchmark(&short(Benchmark::AdvDiff, 1)).unwrap();
    let bytes = encode_trajectory(&t);
    for cut in [bytes.len() - 1, bytes.len() - 8, 40] {
        let err = decode_trajectory(&bytes[..cut]).unwrap_err();
        assert!(matches!(err, Error::Format(FormatError::Truncated { .. })), "cut {cut}: {err}");
    }
}

#[test]
fn preset_dictionaries_match_their_benchmarks() {
    for b in Benchmark::ALL {
        let d = build_dictionary(&DictionarySpec::preset(b)).unwrap();
        assert_eq!(d.grid(), b.grid());
        assert!((d.dt() - b.frame_dt()).abs() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fractaloid_is_normalized(seed in any::<u64>(), degree in 1usize..128, power in 0.5f64..4.0) {
        let u = init_fractaloid(Grid::line(256, 16.0).unwrap(), degree, power, seed).unwrap();
        prop_assert!(u.mean(0).abs() < 1e-12);
        prop_assert!((u.variance(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fourier_mix_is_bounded(seed in any::<u64>(), modes in 1usize..8) {
        let u = init_fourier_mix(Grid::line(256, 16.0).unwrap(), modes, seed).unwrap();
        prop_assert!(u.max_abs() <= 0.5 * modes as f64 + 1e-12);
    }

    #[test]
    fn clustered_gaussians_stay_in_unit_range(seed in any::<u64>(), clusters in 0usize..6) {
        let u = init_clustered_gaussians(Grid::square(32, 2.0).unwrap(), clusters, seed).unwrap();
        prop_assert!(u.values().iter().all(|v| (0.0..=1.0).contains(v)));
        for (a, b) in u.channel(0).iter().zip(u.channel(1)) {
            prop_assert!((a + b - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn container_round_trip(seed in any::<u64>(), frames in 2usize..5, dt in 1e-3f64..10.0) {
        let g = Grid::line(16, 3.0).unwrap();
        let fs: Vec<Field> = (0..frames).map(|i| init_fourier_mix(g, 3, seed.wrapping_add(i as u64)).unwrap()).collect();
        let t = Trajectory::new(fs, dt).unwrap().with_metadata([(Coeff::C, dt)].into(), seed, "proptest");
        prop_assert_eq!(decode_trajectory(&encode_trajectory(&t)).unwrap(), t);
    }

    #[test]
    fn nrmse_numerator_scales(seed in any::<u64>(), a in 0.1f64..10.0) {
        let g = Grid::line(64, 16.0).unwrap();
        let truth = init_fourier_mix(g, 5, seed).unwrap();
        let e = init_fourier_mix(g, 3, seed ^ 1).unwrap().scaled(0.1);
        let lhs = nrmse(&truth.scaled(a).lin_comb(1.0, &e, 1.0).unwrap(), &truth.scaled(a)).unwrap();
        let rhs = nrmse(&truth.lin_comb(1.0, &e, 1.0 / a).unwrap(), &truth).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn identification_ignores_order(perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle()) {
        let d = build_dictionary(&DictionarySpec::preset(Benchmark::AdvDiff)).unwrap();
        let ids = [0usize, 5, 17, 130, 140, 200];
        let shuffled: Vec<usize> = perm.iter().map(|&i| ids[i]).collect();
        let a = identify_parameters(&OperatorSubset::from_ids(&d, &ids, Scheme::Lie).unwrap(), &d);
        let b = identify_parameters(&OperatorSubset::from_ids(&d, &shuffled, Scheme::Lie).unwrap(), &d);
        prop_assert_eq!(a, b);
    }
}
