//! Measure the geometry of a labeled embedding set and project it to 2D.
//! Writes a scatter plot (SVG plus CSV) into the system temp directory.

use domainmix::harness::{compactness_metrics, pca_scatter_export};
use domainmix::io::rng::rng_stream;
use domainmix::vmf::{sample, EmbeddingBatch, UnitVector};

fn main() {
    let dim = 16;
    let mut rng = rng_stream(11, 0);
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for class in 0..3usize {
        let mut axis = vec![0.0; dim];
        axis[class] = 1.0;
        let mu = UnitVector::new(axis).unwrap();
        features.extend(sample(&mu, 25.0, 120, &mut rng));
        labels.extend(std::iter::repeat(class).take(120));
    }
    let batch = EmbeddingBatch::new(dim, features, labels).unwrap();

    let report = compactness_metrics(&batch);
    println!("mean intra-class cosine: {:.4}", report.mean_intra_cosine);
    if let Some(angle) = report.min_centroid_angle_deg {
        println!("closest centroid pair: {angle:.1} degrees");
    }

    let prefix = std::env::temp_dir().join("domainmix_scatter");
    let pca = pca_scatter_export(&batch, &prefix).unwrap();
    println!(
        "top eigenvalues {:.4} {:.4}",
        pca.eigenvalues[0], pca.eigenvalues[1]
    );
    println!("wrote {} and .csv", prefix.with_extension("svg").display());
}
