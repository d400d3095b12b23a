use lattice_nls::diagnostics::{
    concentration_ratios, normalize_translation, rescale, rescaled_grid, CellWindow,
};
use lattice_nls::grid::{Field, Grid};
use lattice_nls::harness::{decode_field, encode_field};
use lattice_nls::potential::{PotentialVariant, ProblemSpec};
use proptest::prelude::*;

fn bump(grid: &Grid, centre: (f64, f64), width: f64, height: f64) -> Field {
    Field::from_fn(grid, |x| {
        let r2 = (x[0] - centre.0).powi(2) + (x[1] - centre.1).powi(2);
        height * (-r2 / (width * width)).exp()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn nsfield_round_trip_is_bit_exact(
        dim in 2usize..=3,
        n in 4usize..9,
        half_width in 0.5f64..20.0,
        seed in any::<u64>(),
    ) {
        let grid = Grid::new(dim, half_width, n).unwrap();
        let mut state = seed | 1;
        let values: Vec<f64> = (0..grid.len())
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                let v = f64::from_bits(state);
                if v.is_finite() { v } else { 0.0 }
            })
            .collect();
        let field = Field::from_values(grid, values).unwrap();
        let bytes = encode_field(&field, 3.5, 0.25, PotentialVariant::SingleBall);
        let back = decode_field(&bytes).unwrap();
        prop_assert_eq!(back.p, 3.5);
        prop_assert_eq!(back.epsilon, 0.25);
        prop_assert_eq!(back.field.grid(), field.grid());
        let same = back.field.values().iter().zip(field.values()).all(|(a, b)| a.to_bits() == b.to_bits());
        prop_assert!(same);
    }

    #[test]
    fn ratios_stay_in_the_unit_interval(
        cx in -2.5f64..2.5,
        cy in -2.5f64..2.5,
        width in 0.1f64..1.5,
        second in 0.0f64..1.0,
    ) {
        let grid = Grid::with_cells_per_unit(2, 4.0, 8).unwrap();
        let spec = ProblemSpec::new(2, 4.0, 0.3, PotentialVariant::LatticeBalls).unwrap();
        let window = CellWindow::new(2, 0.625, 1.6, 0.45).unwrap();
        let a = bump(&grid, (cx, cy), width, 1.0);
        let b = bump(&grid, (-cy, cx), 0.5, second);
        let u = a.add_scaled(1.0, &b);
        let (u, _) = normalize_translation(&u, &window).unwrap();
        let r = concentration_ratios(&u, &spec, &window).unwrap();
        for v in [r.ratio_h1, r.ratio_lp, r.global_ratio_h1, r.global_ratio_lp] {
            prop_assert!((0.0..=1.0).contains(&v), "ratio {v}");
        }
        prop_assert!(r.overshoot <= 1e-12);
        // after normalisation Ω carries at least as much H¹ mass as any other cell
        for (y, &m) in &r.cell_norms {
            prop_assert!(r.omega_h1_sq >= m * (1.0 - 1e-12), "cell {y:?}: {m} > {}", r.omega_h1_sq);
        }
    }
}

#[test]
fn rescaling_samples_the_original_at_matching_centres() {
    let grid = Grid::with_cells_per_unit(2, 3.0, 8).unwrap();
    let spec = ProblemSpec::new(2, 4.0, 0.25, PotentialVariant::LatticeBalls).unwrap();
    let u = bump(&grid, (0.1, -0.2), 0.7, 2.0);
    let target = rescaled_grid(&grid, spec.epsilon).unwrap();
    let v = rescale(&u, &spec, &target);
    let factor = spec.epsilon.powf(2.0 / (spec.p - 2.0));
    for (a, b) in v.values().iter().zip(u.values()) {
        assert!((a - factor * b).abs() <= 1e-14 * b.abs().max(1.0));
    }
}
