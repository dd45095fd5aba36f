//! Library-level pipeline test: synthesize, catalog, train (briefly),
//! persist, reload, and query through both execution paths.

use genaqp::catalog::{Catalog, HistogramScheme};
use genaqp::cgen::{build_training_set, GeneratorHandle};
use genaqp::data::{gen_gauss, GaussSpec};
use genaqp::model::{load_model, save_model, validate_against_catalog};
use genaqp::neural::{train_cwgan, WganConfig};
use genaqp::query::{
    execute_approx, execute_exact, parse, ApproxOptions, ApproxSource, Budget, Strategy,
};

#[test]
fn train_persist_reload_query() {
    let table = gen_gauss(&GaussSpec::reference(2e-4, 77)).unwrap(); // 20k rows
    let catalog = Catalog::build(&table, Some(("x", 5, HistogramScheme::EquiDepth))).unwrap();
    let ts = build_training_set(&table, &catalog, true).unwrap();
    let cfg = WganConfig {
        epochs: 3,
        generator_hidden: vec![32, 16],
        critic_hidden: vec![32, 16],
        ..WganConfig::default()
    };
    let model = train_cwgan(&ts.rows, &ts.labels, &cfg, 9).unwrap();
    assert_eq!(
        model.log.critic_batches,
        5 * model.log.generator_batches,
        "critic/generator batch ratio"
    );
    let handle = GeneratorHandle::new(
        model.generator,
        catalog.group_codec(),
        catalog.bucket_codec(),
        ts.scaler,
        cfg.noise_dim,
        catalog.schema_hash(),
    )
    .unwrap();

    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("m.model");
    let catalog_path = dir.path().join("c.catalog");
    save_model(&model_path, &handle, &model.critic).unwrap();
    catalog.save(&catalog_path).unwrap();
    let (handle, critic) = load_model(&model_path).unwrap();
    let catalog = Catalog::load(&catalog_path).unwrap();
    validate_against_catalog(&handle, &catalog).unwrap();
    assert!(critic.max_abs_param() <= 0.1 + 1e-12);

    // Exact and approximate paths agree on COUNT (catalog-backed).
    let spec = parse("SELECT GroupID, COUNT(*) FROM gauss GROUP BY GroupID").unwrap();
    let exact = execute_exact(&spec, &table).unwrap();
    let approx = execute_approx(
        &spec,
        &catalog,
        ApproxSource::Generated(&handle),
        Strategy::Auto,
        Budget::Samples(100),
        &ApproxOptions::default(),
    )
    .unwrap();
    for (e, a) in exact.groups.iter().zip(&approx.groups) {
        assert_eq!(e.value, a.value);
    }

    // The predicate path runs end to end on the bucketed model.
    let spec = parse("SELECT GroupID, AVG(z) FROM gauss WHERE 0 <= x <= 40 GROUP BY GroupID")
        .unwrap();
    let opts = ApproxOptions {
        explain: true,
        ..ApproxOptions::default()
    };
    let est = execute_approx(
        &spec,
        &catalog,
        ApproxSource::Generated(&handle),
        Strategy::Cv,
        Budget::Samples(400),
        &opts,
    )
    .unwrap();
    let diag = est.diagnostics.expect("explain requested");
    assert_eq!(diag.allocated, 400);
    assert!(est.groups.iter().any(|g| !g.missing));
}
