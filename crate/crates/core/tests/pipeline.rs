use pmac::allencahn::{allen_cahn_solve, predict_labels, AllenCahnParams};
use pmac::datapipe::{
    feature_group, image_to_features, load_features_csv, sample_labels, sbm_generate,
    write_matrix_csv, FeatureGroup, GroupScaling, GroupingSpec, LabelFraction, SbmSpec,
};
use pmac::graph::{load_edge_list, Layer, MultilayerGraph};
use pmac::kernel::KernelSpec;
use pmac::powermean::{power_mean_eigs, PowerMeanConfig};

fn error_rate(pred: &[usize], truth: &[usize]) -> f64 {
    pred.iter().zip(truth).filter(|(a, b)| a != b).count() as f64 / truth.len() as f64
}

#[test]
fn sbm_with_negative_power_mean() {
    let (g, truth) = sbm_generate(&SbmSpec::uniform(vec![40, 40, 40], 2, 0.6, 0.1, 4)).unwrap();
    let labels = sample_labels(&truth, &LabelFraction::Uniform(0.05), 4, 1000.0).unwrap();
    let basis = power_mean_eigs(&g, &PowerMeanConfig::new(-10.0).unwrap(), 3, 1e-8).unwrap();
    let r = allen_cahn_solve(&basis, &labels, &AllenCahnParams::default()).unwrap();
    assert!(error_rate(&predict_labels(&r.scores), &truth) <= 0.05);
}

#[test]
fn edge_list_files_to_predictions() {
    let (g, truth) = sbm_generate(&SbmSpec::uniform(vec![30, 30], 1, 0.5, 0.05, 8)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("layer.txt");
    let w = g.layers()[0].weights().to_dense();
    let mut text = String::from("# i j w\n");
    for i in 0..60 {
        for j in i + 1..60 {
            if w[(i, j)] != 0.0 {
                text += &format!("{i} {j}\n");
            }
        }
    }
    std::fs::write(&path, text).unwrap();
    let loaded = MultilayerGraph::new(vec![
        Layer::new(load_edge_list(&path, Some(60)).unwrap()).unwrap()
    ])
    .unwrap();
    assert_eq!(loaded.layers()[0].weights().to_dense(), w);
    let labels = sample_labels(&truth, &LabelFraction::Uniform(0.1), 1, 1000.0).unwrap();
    let basis = power_mean_eigs(&loaded, &PowerMeanConfig::new(1.0).unwrap(), 2, 1e-8).unwrap();
    let r = allen_cahn_solve(&basis, &labels, &AllenCahnParams::default()).unwrap();
    assert!(error_rate(&predict_labels(&r.scores), &truth) <= 0.05);
}

#[test]
fn feature_csv_two_blobs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    let n = 200;
    let x = nalgebra::DMatrix::from_fn(n, 2, |i, j| {
        let c = if i < n / 2 { 0.0 } else { 10.0 };
        c + ((i * 37 + j * 11) % 17) as f64 / 17.0
    });
    write_matrix_csv(&path, &x).unwrap();
    let fm = load_features_csv(&path).unwrap();
    let truth: Vec<usize> = (0..n).map(|i| usize::from(i >= n / 2)).collect();
    let spec = GroupingSpec::new(vec![FeatureGroup::new(
        vec![0, 1],
        KernelSpec::gaussian(2.0).unwrap(),
        GroupScaling::FastsumBox,
    )]);
    let g = feature_group(&fm, &spec, None).unwrap().graph;
    let labels = sample_labels(&truth, &LabelFraction::Uniform(0.02), 3, 1000.0).unwrap();
    let basis = power_mean_eigs(&g, &PowerMeanConfig::new(1.0).unwrap(), 4, 1e-8).unwrap();
    let r = allen_cahn_solve(&basis, &labels, &AllenCahnParams::default()).unwrap();
    assert_eq!(error_rate(&predict_labels(&r.scores), &truth), 0.0);
}

#[test]
fn image_mask_round_trip() {
    let img = image::RgbImage::from_fn(12, 8, |x, _| {
        if x < 6 {
            image::Rgb([250, 10, 10])
        } else {
            image::Rgb([10, 10, 250])
        }
    });
    let f = image_to_features(&img).unwrap();
    let truth: Vec<usize> = (0..96).map(|i| usize::from(i % 12 >= 6)).collect();
    let spec = GroupingSpec::new(vec![
        FeatureGroup::new(
            vec![0, 1, 2],
            KernelSpec::gaussian(100.0).unwrap(),
            GroupScaling::FastsumBox,
        ),
        FeatureGroup::new(
            vec![3, 4],
            KernelSpec::gaussian(20.0).unwrap(),
            GroupScaling::FastsumBox,
        ),
    ]);
    let g = feature_group(&f.combined(), &spec, Some(&f.components))
        .unwrap()
        .graph;
    let labels = sample_labels(&truth, &LabelFraction::Uniform(0.05), 2, 1000.0).unwrap();
    let basis = power_mean_eigs(&g, &PowerMeanConfig::new(1.0).unwrap(), 4, 1e-8).unwrap();
    let r = allen_cahn_solve(&basis, &labels, &AllenCahnParams::default()).unwrap();
    let pred = predict_labels(&r.scores);
    let masks = f.split(&pred).unwrap();
    assert_eq!(masks.len(), 1);
    assert_eq!(masks[0].len(), f.shapes[0].width * f.shapes[0].height);
    for y in 0..8 {
        for x in 0..12 {
            assert_eq!(masks[0][y * 12 + x], usize::from(x >= 6));
        }
    }
}
