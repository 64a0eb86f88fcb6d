//! The free-fermion engine against dense many-body computations.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xyloc_core::exact_oracle::{build_hamiltonian, hamiltonian_matrix, heisenberg_evolve, ManyBodyOperator};
use xyloc_core::freefermion::{ground_state_data, propagator_entries, solve};
use xyloc_core::localization::realization_correlator;
use xyloc_core::model::ChainSpec;

fn chain(seed: u64, n: usize, anisotropic: bool) -> ChainSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu = (1..n).map(|_| rng.gen_range(0.4..1.4)).collect();
    let gamma = (1..n).map(|_| if anisotropic { rng.gen_range(-0.9..0.9) } else { 0.0 }).collect();
    let nu = (0..n).map(|_| rng.gen_range(-2.5..2.5)).collect();
    ChainSpec::new(mu, gamma, nu).unwrap()
}

fn zero(n: usize) -> ManyBodyOperator {
    ManyBodyOperator::identity(n).unwrap().scale(Complex64::new(0.0, 0.0))
}

fn c_ops(n: usize) -> (Vec<ManyBodyOperator>, Vec<ManyBodyOperator>) {
    let c: Vec<_> = (1..=n).map(|j| ManyBodyOperator::jordan_wigner_c(j, n).unwrap()).collect();
    let cd = c.iter().map(|x| x.adjoint()).collect();
    (c, cd)
}

#[test]
fn hamiltonian_is_the_fermion_quadratic_form() {
    for (seed, aniso) in [(1, true), (2, false), (3, true)] {
        let n = 5;
        let spec = chain(seed, n, aniso);
        let (h, _) = solve(&spec).unwrap();
        let (c, cd) = c_ops(n);
        // (c^*, c) M (c, c^*)^t
        let mut q = zero(n);
        for r in 0..2 * n {
            for s in 0..2 * n {
                let m = h.m[(r, s)];
                if m == 0.0 {
                    continue;
                }
                let left = if r < n { &cd[r] } else { &c[r - n] };
                let right = if s < n { &c[s] } else { &cd[s - n] };
                q = q.add(&left.mul(right).scale(m.into()));
            }
        }
        let dense = hamiltonian_matrix(&spec).unwrap();
        let diff = q.matrix.iter().zip(dense.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-13, "seed {seed}: {diff}");
    }
}

#[test]
fn anticommutators_reproduce_propagator_entries() {
    let n = 5;
    for (seed, aniso) in [(11, true), (12, false)] {
        let spec = chain(seed, n, aniso);
        let ctx = build_hamiltonian(&spec, 10).unwrap();
        let (_, d) = solve(&spec).unwrap();
        let (c, cd) = c_ops(n);
        let id = ManyBodyOperator::identity(n).unwrap();
        for t in [0.3, 2.0] {
            let p = propagator_entries(&d, 2.0 * t);
            for j in 0..n {
                let tc = heisenberg_evolve(&ctx, &c[j], t).unwrap();
                for k in 0..n {
                    let a = tc.anticommutator(&cd[k]).sub(&id.scale(p[(j, k)])).max_abs();
                    let b = tc.anticommutator(&c[k]).sub(&id.scale(p[(j, n + k)])).max_abs();
                    assert!(a < 1e-10 && b < 1e-10, "{a} {b}");
                }
            }
        }
    }
}

#[test]
fn correlator_agrees_with_oracle_evolved_operators() {
    let n = 6;
    let spec = chain(21, n, true);
    let ctx = build_hamiltonian(&spec, 10).unwrap();
    let (_, d) = solve(&spec).unwrap();
    let (c, cd) = c_ops(n);
    let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|j| (j..=n).map(move |k| (j, k))).collect();
    for t in [0.25, 1.5, 4.0] {
        let (grid, eig) = realization_correlator(&d, &pairs, &[2.0 * t]);
        for (i, &(j, k)) in pairs.iter().enumerate() {
            let tc = heisenberg_evolve(&ctx, &c[j - 1], t).unwrap();
            // Anticommutators with c_k^* and c_k are multiples of the identity.
            let x = tc.anticommutator(&cd[k - 1]).matrix[(0, 0)].norm();
            let y = tc.anticommutator(&c[k - 1]).matrix[(0, 0)].norm();
            assert!((grid[i] - (x + y)).abs() < 1e-8);
            assert!(grid[i] <= eig[i] + 1e-12);
        }
    }
}

#[test]
fn ground_state_two_point_function() {
    let n = 7;
    for seed in [31, 32, 33] {
        let spec = chain(seed, n, false);
        let ctx = build_hamiltonian(&spec, 10).unwrap();
        let (_, d) = solve(&spec).unwrap();
        let gs = ground_state_data(&d).unwrap();
        assert!(!gs.degenerate && !ctx.is_degenerate());
        assert!((gs.e0 - ctx.ground_energy).abs() < 1e-10);
        assert!((gs.gap - ctx.gap()).abs() < 1e-10);
        let psi = ctx.ground_vector_complex();
        let (c, cd) = c_ops(n);
        for j in 0..n {
            for k in 0..n {
                let v = cd[j].mul(&c[k]).apply(&psi);
                let val: Complex64 = psi.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                assert!((val.re - gs.projection_minus[(j, k)]).abs() < 1e-10 && val.im.abs() < 1e-12);
            }
        }
    }
}

#[test]
fn isotropic_spectrum_from_number_sectors() {
    let spec = chain(41, 8, false);
    let ctx = build_hamiltonian(&spec, 10).unwrap();
    let (_, d) = solve(&spec).unwrap();
    let want = xyloc_core::runner::free_fermion_spectrum(&d.lambda);
    for (a, b) in want.iter().zip(ctx.spectrum()) {
        assert!((a - b).abs() < 1e-10);
    }
}
