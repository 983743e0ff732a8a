use domainweb_core::classifier::{self, Dataset};
use domainweb_core::graph::LabelIndex;
use domainweb_core::label::Category;
use domainweb_core::sharing::{self, PlantedConfig};

fn planted(seed: u64) -> (Dataset, LabelIndex) {
    let (records, truth) = sharing::planted_share_records(&PlantedConfig::default(), seed);
    let labels: LabelIndex = truth
        .into_iter()
        .map(|(d, l)| (d, l, Category::Uncategorized))
        .collect();
    let m = sharing::ingest(records).matrix;
    let m = sharing::filter_domains(&sharing::filter_users(&m, 2), 5);
    let (data, unlabeled) = Dataset::from_sharing(&m, &labels);
    assert!(unlabeled.is_empty());
    (data, labels)
}

#[test]
fn planted_signal_is_learnable() {
    for seed in [1, 2, 3] {
        let (data, _) = planted(seed);
        let split = classifier::split(&data, 0.25, seed, true).unwrap();
        let train = classifier::oversample(&split.train, seed);
        let tuned = classifier::tune(&train, &classifier::default_grid(), 5, seed).unwrap();
        let model = classifier::train(&train, &tuned.best, seed).unwrap().model;
        let m = classifier::evaluate(&model, &split.test).unwrap();
        assert!(m.misinfo.f1 >= 0.9, "seed {seed}: {m:?}");
    }
}

#[test]
fn planted_coshare_is_homophilous() {
    let (records, truth) = sharing::planted_share_records(&PlantedConfig::default(), 5);
    let labels: LabelIndex = truth
        .into_iter()
        .map(|(d, l)| (d, l, Category::Uncategorized))
        .collect();
    let m = sharing::ingest(records).matrix;
    let g = sharing::build_coshare_graph(&m, &labels, 0.05);
    let s = sharing::connectivity_stats(&g);
    assert!(s.misinfo_within > s.misinfo_cross, "{s:?}");
    assert!(s.info_within > s.info_cross, "{s:?}");
}
