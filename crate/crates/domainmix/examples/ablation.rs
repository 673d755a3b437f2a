//! A shortened run of the four-configuration sweep: no augmentation,
//! always-on mixing, always-on plus the vMF term, and the gated combination.

use domainmix::harness::{ablation_csv, ablation_matrix, SynthSpec, TrainOptions};
use domainmix::io::RunConfig;

fn main() {
    let config = RunConfig::default();
    // a lighter fixture than the committed default keeps this example quick
    let spec = SynthSpec {
        samples_per_class: 60,
        ..SynthSpec::default()
    };
    let options = TrainOptions {
        epochs: 30,
        ..TrainOptions::default()
    };

    let rows = ablation_matrix(&config, &spec, 2, &options).unwrap();
    print!("{}", ablation_csv(&rows));

    println!();
    for row in &rows {
        println!(
            "{:<10} shifted accuracy {:.4} +- {:.4}, intra-class cosine {:.4}",
            row.name, row.mean_shifted_accuracy, row.sd_shifted_accuracy, row.mean_intra_cosine
        );
    }
}
