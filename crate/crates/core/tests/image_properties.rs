use std::collections::BTreeSet;

use proptest::prelude::*;
use qimem::{
    make_ghz, max_svetlichny, overlap, store_classical, store_entangled, Grid, MemoryState,
    OptimizerConfig, PartialTrace, Shape, SparseState, StorageMode, StoredImage,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Disjoint shapes of 2..=4 vertices on a grid of at most 12 cells.
fn image() -> impl Strategy<Value = (Grid, Vec<Vec<usize>>)> {
    (2usize..=4, 2usize..=3)
        .prop_flat_map(|(w, h)| {
            let cells = w * h;
            (
                Just((w, h)),
                Just(cells).prop_shuffle_cells(),
                prop::collection::vec(2usize..=4, 1..=3),
            )
        })
        .prop_filter_map("too many vertices", |((w, h), order, sizes)| {
            if sizes.iter().sum::<usize>() > order.len() {
                return None;
            }
            let mut it = order.into_iter();
            let shapes = sizes.iter().map(|&k| it.by_ref().take(k).collect()).collect();
            Some((Grid::new(w, h).unwrap(), shapes))
        })
}

trait ShuffleCells {
    fn prop_shuffle_cells(self) -> BoxedStrategy<Vec<usize>>;
}

impl ShuffleCells for Just<usize> {
    fn prop_shuffle_cells(self) -> BoxedStrategy<Vec<usize>> {
        Just((0..self.0).collect::<Vec<usize>>()).prop_shuffle().boxed()
    }
}

fn stored(grid: Grid, shapes: &[Vec<usize>], mode: StorageMode) -> StoredImage {
    let shapes = shapes
        .iter()
        .map(|s| Shape::new(s.iter().map(|&q| grid.coordinates(q)).collect()).unwrap())
        .collect();
    StoredImage::new(grid, shapes, mode).unwrap()
}

/// Dense `∏_shapes (|0…0⟩ + |1…1⟩)/√2` on the shape qubits, `|0⟩` elsewhere.
fn dense_entangled(grid: Grid, shapes: &[Vec<usize>]) -> Vec<f64> {
    let n = grid.n_qubits();
    let k = shapes.len();
    let mut v = vec![0.0; 1 << n];
    for choice in 0u32..1 << k {
        let mut index = 0usize;
        for (s, shape) in shapes.iter().enumerate() {
            if choice >> s & 1 == 1 {
                for &q in shape {
                    index |= 1 << (n - 1 - q);
                }
            }
        }
        v[index] = 2f64.powf(-(k as f64) / 2.0);
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn each_shape_reduces_to_a_ghz_state((grid, shapes) in image()) {
        let memory = store_entangled(&stored(grid, &shapes, StorageMode::Entangled)).unwrap();
        for shape in &shapes {
            let mut sorted = shape.clone();
            sorted.sort();
            let reduced = memory.state.partial_trace(&sorted).unwrap();
            let ghz = make_ghz(shape.len()).unwrap().to_density().unwrap();
            let diff = (reduced.matrix() - ghz.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(diff < 1e-12);
        }
    }

    #[test]
    fn stored_states_match_the_dense_oracle((grid, shapes) in image()) {
        let entangled = store_entangled(&stored(grid, &shapes, StorageMode::Entangled)).unwrap();
        let classical = store_classical(&stored(grid, &shapes, StorageMode::Classical)).unwrap();
        let oracle = dense_entangled(grid, &shapes);
        let dense = entangled.state.to_dense().unwrap();
        for (a, b) in dense.iter().zip(&oracle) {
            prop_assert!((a.re - b).abs() < 1e-12 && a.im.abs() < 1e-12);
        }

        // overlaps against the dense oracle: the classical state is the all-ones basis vector
        let k = shapes.len() as f64;
        let initial = MemoryState::initial(grid).unwrap();
        let o = overlap(&initial, &entangled).unwrap();
        prop_assert!((o.re - 2f64.powf(-k / 2.0)).abs() < 1e-12 && o.im.abs() < 1e-12);

        let ones: usize = shapes.iter().flatten().map(|&q| 1 << (grid.n_qubits() - 1 - q)).sum();
        let oc = overlap(&classical, &entangled).unwrap();
        prop_assert!((oc.re - oracle[ones]).abs() < 1e-12);
        let classical_dense = SparseState::basis(grid.n_qubits(), ones as u64).unwrap();
        prop_assert_eq!(&classical.state, &classical_dense);
    }
}

#[test]
fn subsets_mixing_shapes_or_background_do_not_violate() {
    let grid = Grid::new(3, 3).unwrap();
    let shapes = vec![vec![0, 4, 8], vec![2, 5, 6]];
    let memory = store_entangled(&stored(grid, &shapes, StorageMode::Entangled)).unwrap();
    let whole: Vec<BTreeSet<usize>> = shapes.iter().map(|s| s.iter().copied().collect()).collect();
    let config = OptimizerConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    for size in 2..=4 {
        for subset in qimem::enumerate_candidates(9, size).unwrap() {
            let set: BTreeSet<usize> = subset.iter().copied().collect();
            if whole.contains(&set) {
                continue;
            }
            let rho = memory.state.partial_trace(&subset).unwrap();
            let result = max_svetlichny(&rho, &config, &mut rng).unwrap();
            assert!(!result.violated, "subset {subset:?} gave {}", result.value);
            checked += 1;
        }
    }
    assert!(checked > 200);
}
