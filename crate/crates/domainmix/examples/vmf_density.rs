//! Evaluate the von Mises-Fisher density machinery: normalization constants
//! across dimensions, log-density extremes, the batch NLL, and the sign of
//! the concentration gradient.

use domainmix::vmf::{
    log_norm_const, log_pdf, mean_resultant, nll_grad, nll_loss, EmbeddingBatch, UnitVector,
    VmfClassParams,
};

fn main() {
    println!("log C_d(kappa):");
    println!("{:>6} {:>12} {:>12} {:>12}", "d", "k=0.5", "k=5", "k=50");
    for dim in [2usize, 3, 8, 512] {
        let row: Vec<String> = [0.5, 5.0, 50.0]
            .iter()
            .map(|&k| format!("{:>12.4}", log_norm_const(dim, k).unwrap()))
            .collect();
        println!("{dim:>6} {}", row.join(" "));
    }

    // on the sphere at kappa 1 the density peaks at mu and bottoms out at -mu
    let mu = UnitVector::axis(3, 0).unwrap();
    let params = VmfClassParams::new(0, mu.clone(), 1.0, 0.99).unwrap();
    println!("\nlog pdf at mu      {:+.5}", log_pdf(mu.values(), &params).unwrap());
    println!("log pdf at -mu     {:+.5}", log_pdf(&[-1.0, 0.0, 0.0], &params).unwrap());
    println!("log pdf at equator {:+.5}", log_pdf(&[0.0, 1.0, 0.0], &params).unwrap());

    // a batch sitting exactly on its prototype: the loss is -log C - kappa
    // and the concentration still wants to grow (A_d(kappa) < 1)
    let batch = EmbeddingBatch::new(3, mu.values().repeat(4), vec![0; 4]).unwrap();
    let loss = nll_loss(&batch, std::slice::from_ref(&params)).unwrap();
    let grad = nll_grad(&batch, std::slice::from_ref(&params)).unwrap();
    println!("\nNLL with all rows at mu: {loss:.5}");
    println!(
        "dL/dkappa = A_3(1) - 1 = {:+.5} (analytic {:+.5})",
        grad.kappa[0],
        mean_resultant(3, 1.0).unwrap() - 1.0
    );
}
