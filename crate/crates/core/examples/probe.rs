use catdyn_core::dynamics::*;
use catdyn_core::fockspace::*;
use num_complex::Complex64 as C64;

fn main() {
    let cfg = ModelConfig::default_model();
    println!("growth-rate scan for the default model (lambda of -+iH_a):");
    for n_cut in [40usize, 60, 80, 120] {
        for eps in [0.15, 0.25, 0.5, 1.0] {
            let s = build_space(n_cut, 1.0, eps, 0.2 * eps).unwrap();
            let h = build_hamiltonian(&cfg, &s, HamiltonianVariant::HermitianArgs);
            let (_, ha) = split_hermitian(&h);
            let fwd = ha.scaled(C64::new(0.0, -1.0)).hermitian_max_eig();
            let bwd = ha.scaled(C64::new(0.0, 1.0)).hermitian_max_eig();
            println!("  n_cut={n_cut:4} eps={eps:5}: fwd={fwd:10.2} bwd={bwd:10.2}");
        }
    }
}
