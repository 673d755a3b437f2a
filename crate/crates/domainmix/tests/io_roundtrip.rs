//! File formats, configuration, and the seeded stream plumbing: everything
//! here round-trips through real files in a temporary directory.

mod common;

use rand::Rng;

use domainmix::image::ImageTensor;
use domainmix::io::rng::rng_stream;
use domainmix::io::{
    load_image, read_emb, save_image, semantic_shift, write_emb, IoError, RunConfig,
};
use domainmix::augment::LambdaSampler;

fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().expect("create temp dir")
}

// ---------------------------------------------------------------- images

#[test]
fn random_rgb_image_round_trips_within_one_quantum() {
    let dir = tmp();
    let path = dir.path().join("random.ppm");
    let img = common::random_image(4, 4, 3, 901);
    save_image(&img, &path).unwrap();
    let back = load_image(&path).unwrap();
    assert_eq!(back.height(), 4);
    assert_eq!(back.width(), 4);
    assert_eq!(back.channels(), 3);
    assert!(img.max_abs_diff(&back) <= 1.0 / 255.0);
}

#[test]
fn grayscale_image_round_trips_within_one_quantum() {
    let dir = tmp();
    let path = dir.path().join("random.pgm");
    let img = common::random_image(5, 3, 1, 902);
    save_image(&img, &path).unwrap();
    let back = load_image(&path).unwrap();
    assert_eq!(back.channels(), 1);
    assert!(img.max_abs_diff(&back) <= 1.0 / 255.0);
}

#[test]
fn quantized_samples_round_trip_exactly() {
    // Once a file has been through one save, its samples sit on the 8-bit
    // grid and every further save/load cycle is the identity.
    let dir = tmp();
    let first = dir.path().join("first.ppm");
    let second = dir.path().join("second.ppm");
    save_image(&common::random_image(2, 2, 3, 903), &first).unwrap();
    let img = load_image(&first).unwrap();
    save_image(&img, &second).unwrap();
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
    assert_eq!(load_image(&second).unwrap().data(), img.data());
}

#[test]
fn single_red_pixel_decodes_exactly() {
    let dir = tmp();
    let path = dir.path().join("red.ppm");
    std::fs::write(&path, b"P6\n1 1\n255\n\xff\x00\x00").unwrap();
    let img = load_image(&path).unwrap();
    assert_eq!(img.data(), &[1.0, 0.0, 0.0]);
}

#[test]
fn maxval_scales_samples() {
    let dir = tmp();
    let path = dir.path().join("half.pgm");
    std::fs::write(&path, b"P5\n1 1\n100\n\x32").unwrap();
    assert_eq!(load_image(&path).unwrap().data(), &[0.5]);
}

#[test]
fn header_comments_and_padding_are_skipped() {
    let dir = tmp();
    let path = dir.path().join("comments.pgm");
    std::fs::write(&path, b"P5 # magic\n# a comment line\n  2\t1 \n255\n\x00\xff").unwrap();
    let img = load_image(&path).unwrap();
    assert_eq!(img.data(), &[0.0, 1.0]);
}

#[test]
fn save_clamps_out_of_range_samples() {
    let dir = tmp();
    let path = dir.path().join("clamped.pgm");
    let img = ImageTensor::new(1, 2, 1, vec![1.5, -0.25]).unwrap();
    save_image(&img, &path).unwrap();
    assert_eq!(load_image(&path).unwrap().data(), &[1.0, 0.0]);
}

#[test]
fn truncated_header_is_rejected() {
    let dir = tmp();
    for bytes in [&b""[..], b"P", b"P6", b"P6\n4", b"P6\n4 4\n255"] {
        let path = dir.path().join("trunc.ppm");
        std::fs::write(&path, bytes).unwrap();
        match load_image(&path) {
            Err(IoError::Malformed { .. }) => {}
            other => panic!("{:?} accepted truncated header {bytes:?}", other.map(|_| ())),
        }
    }
}

#[test]
fn bad_magic_is_rejected_at_offset_zero() {
    let dir = tmp();
    let path = dir.path().join("bad.ppm");
    std::fs::write(&path, b"P4\n1 1\n255\n\x00").unwrap();
    match load_image(&path) {
        Err(IoError::Malformed { offset, .. }) => assert_eq!(offset, 0),
        other => panic!("expected malformed error, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn sample_count_mismatch_is_rejected() {
    let dir = tmp();
    // 2x2 RGB needs 12 sample bytes; provide 11 and 13.
    for extra in [11usize, 13] {
        let path = dir.path().join("count.ppm");
        let mut bytes = b"P6\n2 2\n255\n".to_vec();
        bytes.extend(std::iter::repeat(7u8).take(extra));
        std::fs::write(&path, &bytes).unwrap();
        match load_image(&path) {
            Err(IoError::Malformed { offset, reason, .. }) => {
                assert_eq!(offset, 11, "offset should point at the sample data");
                assert!(reason.contains("12"), "reason {reason:?} lacks expected count");
            }
            other => panic!("expected malformed error, got {:?}", other.map(|_| ())),
        }
    }
}

#[test]
fn degenerate_header_fields_are_rejected() {
    let dir = tmp();
    for header in ["P6\n0 1\n255\n", "P6\n1 1\n0\n", "P6\n1 1\n300\n"] {
        let path = dir.path().join("degenerate.ppm");
        std::fs::write(&path, header.as_bytes()).unwrap();
        assert!(matches!(load_image(&path), Err(IoError::Malformed { .. })), "{header:?}");
    }
}

#[test]
fn missing_file_is_a_file_error() {
    let dir = tmp();
    match load_image(dir.path().join("absent.ppm")) {
        Err(IoError::File { path, .. }) => assert!(path.contains("absent.ppm")),
        other => panic!("expected file error, got {:?}", other.map(|_| ())),
    }
}

// ------------------------------------------------------------ embeddings

#[test]
fn emb_file_round_trips_through_f32() {
    let dir = tmp();
    let path = dir.path().join("batch.emb");
    let mut rng = rng_stream(910, 0);
    let features: Vec<f64> = (0..5 * 3).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let labels = vec![0u32, 2, 1, 2, 0];
    write_emb(&path, 3, 3, &features, &labels).unwrap();

    let back = read_emb(&path).unwrap();
    assert_eq!(back.dim, 3);
    assert_eq!(back.n_classes, 3);
    assert_eq!(back.n(), 5);
    assert_eq!(back.labels, labels);
    for (stored, original) in back.features.iter().zip(&features) {
        assert_eq!(*stored, *original as f32 as f64);
    }
    assert_eq!(back.row(2), &back.features[6..9]);
}

#[test]
fn emb_truncation_is_rejected() {
    let dir = tmp();
    let path = dir.path().join("short.emb");
    write_emb(&path, 2, 1, &[0.1, 0.2, 0.3, 0.4], &[0, 0]).unwrap();
    let mut bytes = std::fs::read(&path).unwrap();
    bytes.pop();
    std::fs::write(&path, &bytes).unwrap();
    match read_emb(&path) {
        Err(IoError::Malformed { offset, .. }) => assert_eq!(offset, 16),
        other => panic!("expected malformed error, got {other:?}"),
    }
}

#[test]
fn emb_bad_magic_is_rejected() {
    let dir = tmp();
    let path = dir.path().join("magic.emb");
    let mut bytes = b"EMB2".to_vec();
    bytes.extend([0u8; 12]);
    std::fs::write(&path, &bytes).unwrap();
    assert!(matches!(read_emb(&path), Err(IoError::Malformed { offset: 0, .. })));
}

#[test]
fn emb_label_out_of_range_is_rejected() {
    let dir = tmp();
    let path = dir.path().join("label.emb");
    let mut bytes = b"EMB1".to_vec();
    bytes.extend(1u32.to_le_bytes()); // n
    bytes.extend(2u32.to_le_bytes()); // dim
    bytes.extend(1u32.to_le_bytes()); // n_classes
    bytes.extend(0.5f32.to_le_bytes());
    bytes.extend(0.5f32.to_le_bytes());
    bytes.extend(1u32.to_le_bytes()); // label 1 with only 1 class
    std::fs::write(&path, &bytes).unwrap();
    match read_emb(&path) {
        Err(IoError::Malformed { offset, reason, .. }) => {
            assert_eq!(offset, 24);
            assert!(reason.contains("label 1"), "{reason:?}");
        }
        other => panic!("expected malformed error, got {other:?}"),
    }
}

#[test]
fn emb_non_finite_feature_is_rejected() {
    let dir = tmp();
    let path = dir.path().join("nan.emb");
    let mut bytes = b"EMB1".to_vec();
    bytes.extend(1u32.to_le_bytes());
    bytes.extend(2u32.to_le_bytes());
    bytes.extend(1u32.to_le_bytes());
    bytes.extend(f32::NAN.to_le_bytes());
    bytes.extend(0.5f32.to_le_bytes());
    bytes.extend(0u32.to_le_bytes());
    std::fs::write(&path, &bytes).unwrap();
    assert!(matches!(read_emb(&path), Err(IoError::Malformed { offset: 16, .. })));
}

#[test]
fn emb_zero_dimension_is_rejected() {
    let dir = tmp();
    let path = dir.path().join("dim.emb");
    let mut bytes = b"EMB1".to_vec();
    bytes.extend(0u32.to_le_bytes());
    bytes.extend(0u32.to_le_bytes());
    bytes.extend(1u32.to_le_bytes());
    std::fs::write(&path, &bytes).unwrap();
    assert!(matches!(read_emb(&path), Err(IoError::Malformed { offset: 8, .. })));
}

// ----------------------------------------------------------- run config

#[test]
fn config_serialization_round_trips_every_field() {
    let config = RunConfig {
        p_aug: 0.37,
        lambda_sampler: LambdaSampler::BetaSym { alpha: 0.25 },
        lambda_vmf: 0.0125,
        ema_momentum: 0.875,
        kappa_init: 3.5,
        seed: 12345678901234567890,
        feature_dim: 24,
        image_height: 30,
        image_width: 18,
        input_path: Some("data/in".to_string()),
        output_path: Some("data/out".to_string()),
    };
    let back = RunConfig::parse(&config.serialize(), "inline").unwrap();
    assert_eq!(back, config);
}

#[test]
fn default_config_round_trips_and_validates() {
    let config = RunConfig::default();
    assert_eq!(config.p_aug, 0.5);
    assert_eq!(config.lambda_vmf, 0.005);
    assert_eq!(config.ema_momentum, 0.99);
    config.validate().unwrap();
    assert_eq!(RunConfig::parse(&config.serialize(), "inline").unwrap(), config);
}

#[test]
fn config_file_round_trips_on_disk() {
    let dir = tmp();
    let path = dir.path().join("run.cfg");
    let mut config = RunConfig::default();
    config.lambda_sampler = LambdaSampler::Fixed { value: 0.75 };
    config.seed = 99;
    config.to_file(&path).unwrap();
    assert_eq!(RunConfig::from_file(&path).unwrap(), config);
}

#[test]
fn partial_config_keeps_defaults_elsewhere() {
    let cfg = RunConfig::parse("seed = 9\n# comment\n\np_aug = 0.25\n", "inline").unwrap();
    assert_eq!(cfg.seed, 9);
    assert_eq!(cfg.p_aug, 0.25);
    assert_eq!(cfg.lambda_vmf, 0.005);
    assert_eq!(cfg.feature_dim, 16);
}

#[test]
fn unknown_config_key_reports_its_line() {
    match RunConfig::parse("seed = 1\n\nbogus = 3\n", "run.cfg") {
        Err(IoError::Config { path, line, reason }) => {
            assert_eq!(path, "run.cfg");
            assert_eq!(line, 3);
            assert!(reason.contains("bogus"), "{reason:?}");
        }
        other => panic!("expected config error, got {other:?}"),
    }
}

#[test]
fn unparseable_config_value_reports_its_line() {
    match RunConfig::parse("p_aug = often\n", "run.cfg") {
        Err(IoError::Config { line: 1, reason, .. }) => {
            assert!(reason.contains("p_aug"), "{reason:?}")
        }
        other => panic!("expected config error, got {other:?}"),
    }
}

#[test]
fn config_line_without_equals_is_rejected() {
    assert!(matches!(
        RunConfig::parse("p_aug 0.5\n", "run.cfg"),
        Err(IoError::Config { line: 1, .. })
    ));
}

#[test]
fn out_of_range_config_value_fails_validation() {
    for text in ["p_aug = 2\n", "ema_momentum = -0.5\n", "kappa_init = 0\n", "feature_dim = 1\n"] {
        match RunConfig::parse(text, "run.cfg") {
            Err(IoError::Config { .. }) => {}
            other => panic!("{text:?} accepted: {other:?}"),
        }
    }
}

// ------------------------------------------------------- semantic shift

#[test]
fn identical_embeddings_have_zero_shift() {
    let q = vec![0.25, -1.5, 3.0];
    let delta = semantic_shift(&q, &q).unwrap();
    assert!(delta.iter().all(|&v| v == 0.0));
}

#[test]
fn shift_is_the_elementwise_difference() {
    let delta = semantic_shift(&[1.0, 2.0], &[3.0, 5.0]).unwrap();
    assert_eq!(delta, vec![2.0, 3.0]);
}

#[test]
fn shift_norm_is_zero_only_for_coinciding_embeddings() {
    let q_s = vec![0.5, 0.5];
    let q_t = vec![0.5, 0.5 + 1e-9];
    let norm = |d: &[f64]| d.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert_eq!(norm(&semantic_shift(&q_s, &q_s).unwrap()), 0.0);
    assert!(norm(&semantic_shift(&q_s, &q_t).unwrap()) > 0.0);
}

#[test]
fn shift_dimension_mismatch_is_rejected() {
    assert!(matches!(
        semantic_shift(&[1.0, 2.0], &[1.0, 2.0, 3.0]),
        Err(IoError::DimMismatch(2, 3))
    ));
}

// ------------------------------------------------------- seeded streams

#[test]
fn same_seed_and_stream_repeat_exactly() {
    let draws = |seed, id| -> Vec<f64> {
        let mut rng = rng_stream(seed, id);
        (0..100).map(|_| rng.random()).collect()
    };
    assert_eq!(draws(7, 3), draws(7, 3));
}

#[test]
fn distinct_streams_diverge_within_64_draws() {
    let prefix = |seed, id| -> Vec<u64> {
        let mut rng = rng_stream(seed, id);
        (0..64).map(|_| rng.random()).collect()
    };
    assert_ne!(prefix(7, 0), prefix(7, 1));
    assert_ne!(prefix(7, 0), prefix(8, 0));
    // Nearby ids must differ too, not only id 0 vs 1.
    for id in 1..16 {
        assert_ne!(prefix(7, id), prefix(7, id + 1), "streams {id} and {} collide", id + 1);
    }
}

#[test]
fn uniform_draw_mean_matches_over_many_draws() {
    let mut rng = rng_stream(0, 11);
    let n = 100_000;
    let mean = (0..n).map(|_| rng.random::<f64>()).sum::<f64>() / n as f64;
    assert!((0.497..=0.503).contains(&mean), "mean {mean}");
}
