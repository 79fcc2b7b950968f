use lossy_walk::model::build_real_space_hamiltonian;
use lossy_walk::spectrum::{lattice_spectrum, spectrum_scan, EdgeSide};
use lossy_walk::{EdgeCriteria64, Params64};
use nalgebra::DMatrix;

fn paper(v: f64) -> Params64 {
    Params64::default().with_v(v)
}

#[test]
fn census_is_mirror_symmetric_near_zero_v() {
    let crit = EdgeCriteria64::default();
    for i in 1..=30 {
        let v = i as f64 * 0.002;
        let pos = lattice_spectrum(&paper(v), &crit).unwrap();
        let neg = lattice_spectrum(&paper(-v), &crit).unwrap();
        assert_eq!(pos.edge_count(), 2, "v = {v}");
        assert_eq!(neg.edge_count(), 2, "v = -{v}");
        assert_eq!(pos.count_on(EdgeSide::Left), neg.count_on(EdgeSide::Right), "v = {v}");
        assert_eq!(pos.count_on(EdgeSide::Right), neg.count_on(EdgeSide::Left), "v = {v}");
    }
}

#[test]
fn edge_count_window() {
    let crit = EdgeCriteria64::default();
    for v in [-0.54, -0.4, 0.2, 0.45, 0.54] {
        assert_eq!(lattice_spectrum(&paper(v), &crit).unwrap().edge_count(), 2, "v = {v}");
    }
    for v in [-0.8, -0.58, 0.58, 0.7, 1.0] {
        assert_eq!(lattice_spectrum(&paper(v), &crit).unwrap().edge_count(), 0, "v = {v}");
    }
}

#[test]
fn eigenvalues_match_independent_solver() {
    // well-conditioned spectra only: at skin-effect v both solvers are at the
    // mercy of a ~1e20 eigenvector condition number
    for v in [0.0, 0.9, -1.0] {
        let p = paper(v);
        let h = build_real_space_hamiltonian(&p).unwrap();
        let n = h.dim();
        let oracle = DMatrix::from_fn(n, n, |i, j| h[(i, j)]).schur().eigenvalues().unwrap();
        let mut want: Vec<_> = oracle.iter().copied().collect();
        want.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        let got = spectrum_scan(&p, &[v], &EdgeCriteria64::default()).unwrap().remove(0);
        let mut used = vec![false; n];
        for e in &got.eigenvalues {
            let (k, d) = want
                .iter()
                .enumerate()
                .filter(|(k, _)| !used[*k])
                .map(|(k, w)| (k, (w - e).norm()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            used[k] = true;
            assert!(d < 1e-8, "v = {v}: {e} off by {d}");
        }
    }
}
