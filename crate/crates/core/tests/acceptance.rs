//! One test per acceptance criterion; run with `--nocapture` to see the measured values.

use hcmeta_core::acceptance::{run_criterion, AcceptanceConfig};

fn check(id: usize) {
    let r = run_criterion(id, &AcceptanceConfig::default());
    println!("{}", r.line());
    assert!(r.pass, "{}", r.line());
}

macro_rules! criteria {
    ($($name:ident = $id:expr;)*) => {
        $(
            #[test]
            fn $name() {
                check($id);
            }
        )*
    };
}

criteria! {
    criterion_01_complete_bipartite_series_law = 1;
    criterion_02_even_cycle_sharp_mean = 2;
    criterion_03_cyclic_ladder_sharp_mean = 3;
    criterion_04_cycle_crossover_exponential_law = 4;
    criterion_05_odd_path_sum_of_exponentials = 5;
    criterion_06_single_uniform_gate_passage = 6;
    criterion_07_isoperimetric_closed_forms = 7;
    criterion_08_torus_gate_count = 8;
    criterion_09_lattice_critical_sizes = 9;
    criterion_10_potential_identities = 10;
    criterion_11_no_trap_certificates = 11;
    criterion_12_monotone_coupling = 12;
    criterion_13_symbolic_numeric_orders = 13;
}
