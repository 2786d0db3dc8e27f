use decaylab::disorder::{realize_field, ModelParams, PotentialField};
use decaylab::operator::*;
use decaylab::spectral::{dense_eig, lanczos_smallest};
use decaylab::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn field(dim: usize, side: u32, seed: u64) -> (PotentialField, LatticeBox) {
    let params = ModelParams::new(dim, 0.5, 1.0).unwrap();
    let bx = LatticeBox::centered(dim, side).unwrap();
    (realize_field(seed, &params, &bx).unwrap(), bx)
}

#[test]
fn three_point_free_chain() {
    let bx = LatticeBox::centered(1, 4).unwrap();
    let op = assemble_free(&bx, &Grid::new(1).unwrap()).unwrap();
    assert_eq!(op.dimension(), 3);
    assert_eq!(
        op.to_dense(),
        vec![vec![2.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]]
    );
    let e = dense_eig(&op, false).unwrap().eigenvalues;
    let s = 2f64.sqrt();
    for (got, want) in e.iter().zip([2.0 - s, 2.0, 2.0 + s]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn stencil_identities_on_random_fields() {
    for &(dim, side, m) in &[(1usize, 10u32, 4u32), (2, 8, 3), (3, 4, 2)] {
        let (f, bx) = field(dim, side, 3);
        let grid = Grid::new(m).unwrap();
        let op = assemble(&f, &bx, &grid).unwrap();
        let pts = op.points().unwrap();
        let h2 = grid.h().powi(2);
        for i in 0..op.dimension() {
            let v = f.value(&pts.cell_of(i)).unwrap();
            assert_eq!(op.entry(i, i), 2.0 * dim as f64 / h2 + v);
            let mut sum = 0.0;
            let mut neighbours = 0;
            for (j, x) in op.row(i) {
                assert_eq!(op.entry(j, i), x);
                sum += x;
                if j != i {
                    assert_eq!(x, -1.0 / h2);
                    neighbours += 1;
                }
            }
            if neighbours == 2 * dim {
                assert!((sum - v).abs() <= 1e-12 * (1.0 + v.abs() + 1.0 / h2), "{sum} vs {v}");
            }
        }
    }
}

#[test]
fn cells_follow_the_half_open_convention() {
    let bx = LatticeBox::centered(1, 4).unwrap();
    let pts = PointLattice::for_box(&bx, &Grid::new(2).unwrap()).unwrap();
    // x = -1.5, -1, ..., 1.5; cell(x) = ceil(x) - 1
    let cells: Vec<i64> = (0..pts.len()).map(|i| pts.cell_of(i).0[0]).collect();
    let want: Vec<i64> = (0..pts.len()).map(|i| pts.coords(i)[0].ceil() as i64 - 1).collect();
    assert_eq!(cells, want);
}

#[test]
fn single_well_family() {
    let bx = LatticeBox::centered(1, 8).unwrap();
    let grid = Grid::new(4).unwrap();
    let free: Vec<_> = assemble_free(&bx, &grid).unwrap().triples().collect();
    let zero: Vec<_> = assemble_single_well(0.0, &bx, &grid).unwrap().triples().collect();
    assert_eq!(free, zero);
    let pos = assemble_single_well(3.0, &bx, &grid).unwrap();
    assert!(dense_eig(&pos, false).unwrap().eigenvalues[0] > 0.0);
    let tight = LatticeBox::new(1, Site::new(&[3]), 8).unwrap();
    assert!(matches!(
        assemble_single_well(-1.0, &tight, &grid),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn neumann_cell_block() {
    let op = assemble_cell_neumann(-2.5, 2, &Grid::new(5).unwrap()).unwrap();
    let ones = vec![1.0; op.dimension()];
    let y = op.apply(&ones).unwrap();
    assert!(y.iter().all(|&x| (x + 2.5).abs() < 1e-12));
    let kinetic = assemble_cell_neumann(0.0, 3, &Grid::new(3).unwrap()).unwrap();
    for i in 0..kinetic.dimension() {
        assert!(kinetic.row(i).map(|(_, x)| x).sum::<f64>().abs() < 1e-12);
    }
    let m = 20;
    let e = dense_eig(&assemble_cell_neumann(0.0, 1, &Grid::new(m).unwrap()).unwrap(), false)
        .unwrap()
        .eigenvalues;
    let h = 1.0 / f64::from(m);
    let exact = 2.0 / (h * h) * (1.0 - (std::f64::consts::PI / f64::from(m)).cos());
    assert!((e[1] - exact).abs() < 1e-9 * exact);
    assert!((e[1] / std::f64::consts::PI.powi(2) - 1.0).abs() < 0.01);
}

#[test]
fn apply_contract() {
    let (f, bx) = field(2, 6, 8);
    let op = assemble(&f, &bx, &Grid::new(3).unwrap()).unwrap();
    assert!(op.apply(&vec![0.0; op.dimension()]).unwrap().iter().all(|&x| x == 0.0));
    assert!(op.apply(&[1.0, 2.0]).is_err());
    let spec = dense_eig(&op, true).unwrap();
    for (l, v) in spec.eigenvalues.iter().zip(spec.eigenvectors.as_ref().unwrap()).take(5) {
        let y = op.apply(v).unwrap();
        let err: f64 = y.iter().zip(v).map(|(a, b)| (a - l * b).powi(2)).sum::<f64>().sqrt();
        assert!(err <= 1e-10 * l.abs().max(op.norm_inf()));
    }
    // complex mode acts on real and imaginary parts separately
    let x = random_vec(op.dimension(), 1);
    let z: Vec<num_complex::Complex64> = x.iter().map(|&r| num_complex::Complex64::new(r, -2.0 * r)).collect();
    let yz = op.apply_complex(&z).unwrap();
    let yx = op.apply(&x).unwrap();
    for (a, b) in yz.iter().zip(&yx) {
        assert_eq!(a.re, *b);
        assert_eq!(a.im, -2.0 * b);
    }
}

#[test]
fn coverage_and_size_guards() {
    let (f, _) = field(1, 6, 1);
    let bigger = LatticeBox::centered(1, 10).unwrap();
    assert!(matches!(
        assemble(&f, &bigger, &Grid::new(2).unwrap()),
        Err(Error::Precondition(_))
    ));
    let huge = LatticeBox::centered(3, 1000).unwrap();
    assert!(matches!(
        assemble_free(&huge, &Grid::new(100).unwrap()),
        Err(Error::Size { .. })
    ));
}

fn ground_error(dim: usize, side: u32, m: u32) -> f64 {
    let bx = LatticeBox::centered(dim, side).unwrap();
    let op = assemble_free(&bx, &Grid::new(m).unwrap()).unwrap();
    let e = lanczos_smallest(&op, 1, 1e-13, 3).unwrap().eigenvalues[0];
    let exact = dim as f64 * (std::f64::consts::PI / f64::from(side)).powi(2);
    (e - exact).abs()
}

#[test]
fn free_ground_energy_converges_at_second_order() {
    for &(dim, side) in &[(1usize, 4u32), (2, 2)] {
        let errs: Vec<f64> = [8, 16, 32].iter().map(|&m| ground_error(dim, side, m)).collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((1.7..=2.3).contains(&order), "d = {dim}: order {order} from {errs:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn free_form_is_nonnegative(seed in any::<u64>()) {
        let bx = LatticeBox::centered(2, 4).unwrap();
        let op = assemble_free(&bx, &Grid::new(3).unwrap()).unwrap();
        let x = random_vec(op.dimension(), seed);
        prop_assert!(op.quadratic_form(&x).unwrap() >= 0.0);
    }

    #[test]
    fn form_dominates_decoupled_cells(seed in any::<u64>(), dim in 1usize..=2, m in 1u32..5) {
        let (f, bx) = field(dim, 6, seed);
        let op = assemble(&f, &bx, &Grid::new(m).unwrap()).unwrap();
        let u = random_vec(op.dimension(), seed ^ 77);
        let full = op.quadratic_form(&u).unwrap();
        let cells = op.decoupled_cell_form(&u).unwrap();
        let scale: f64 = u.iter().map(|x| x * x).sum::<f64>() * (op.norm_inf() + 1.0);
        prop_assert!(full >= cells - 1e-12 * scale, "{} < {}", full, cells);
    }
}
