//! Grid syntax properties.

use proptest::prelude::*;
use qrx_cli::grid::{parse_counts, parse_reals};
use qrx_cli::table::Cell;

proptest! {
    #[test]
    fn linear_grid_has_n_points_and_exact_ends(a in -1e3f64..1e3, b in -1e3f64..1e3, n in 2usize..500) {
        let g = parse_reals(&format!("{a:e}:{b:e}:{n}")).unwrap();
        prop_assert_eq!(g.len(), n);
        prop_assert_eq!((g[0], g[n - 1]), (a, b));
        let step = (b - a) / (n - 1) as f64;
        for w in g.windows(2) {
            prop_assert!(((w[1] - w[0]) - step).abs() <= 1e-9 * (a.abs() + b.abs() + 1.0));
        }
    }

    #[test]
    fn log_grid_is_geometric(lo in -8f64..2.0, span in 0.1f64..6.0, n in 2usize..300) {
        let (a, b) = (10f64.powf(lo), 10f64.powf(lo + span));
        let g = parse_reals(&format!("log:{a:e}:{b:e}:{n}")).unwrap();
        prop_assert_eq!(g.len(), n);
        prop_assert_eq!((g[0], g[n - 1]), (a, b));
        let ratio = (b / a).powf(1.0 / (n - 1) as f64);
        for w in g.windows(2) {
            prop_assert!((w[1] / w[0] / ratio - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn power_of_two_progressions(lo in 0u32..6, hi in 7u32..20) {
        let g = parse_counts(&format!("{},{},...,{}", 1u64 << lo, 1u64 << (lo + 1), 1u64 << hi)).unwrap();
        let expected: Vec<usize> = (lo..=hi).map(|i| 1usize << i).collect();
        prop_assert_eq!(g, expected);
    }

    #[test]
    fn arithmetic_progressions(start in -50i64..50, step in 1i64..20, len in 3usize..60) {
        let end = start + step * (len as i64 - 1);
        let g = parse_reals(&format!("{},{},{},...,{}", start, start + step, start + 2 * step, end)).unwrap();
        prop_assert_eq!(g.len(), len);
        for (i, x) in g.iter().enumerate() {
            prop_assert!((x - (start + step * i as i64) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn csv_reals_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        prop_assert_eq!(Cell::Real(x).to_csv().parse::<f64>().unwrap(), x);
    }
}
