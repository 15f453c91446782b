use cr3lab::spectral::*;
use cr3lab::structures::*;
use cr3lab::workspace::Workspace;

fn main() {
    let ws = Workspace::new(12, 7).unwrap();
    let li = model_structure(&ws, &ModelSpec::LeftInvariant { a: 1.2 }, &SolveOptions::default()).unwrap();
    let m = assemble(&ws, &li, 4).unwrap();
    let rep = eigensolve(&m, 1e-6).unwrap();
    println!("LI(1.2) N=4: kernel {} crph {} min-eig {:.3e} lambda {:.4} sym {:.2e}",
        rep.kernel_dim, crph_basis(4).len(), rep.eigenvalues[0], rep.lambda,
        m.symmetry_defect);
    println!("first eigs: {:?}", &rep.eigenvalues[..6.min(rep.eigenvalues.len())]);
}
