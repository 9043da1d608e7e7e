//! End-to-end training fixtures: constructed separable tasks where the
//! expected outcome is known by design, so training quality is testable
//! without external data or pretrained weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use locus_core::corpus::{
    Dataset, EntitySpan, Label, LabelSchema, LabeledExample, Provenance, TaskKind,
};
use locus_core::eval::evaluate_model;
use locus_core::model::{
    encode_dataset, init_model, predict, standard_dev_metric, train, ModelConfig, TrainConfig,
};

/// Two classes, disjoint keyword vocabularies: a bag-of-tokens linear model
/// attains 100%, so full training must reach at least 99% train accuracy.
fn separable_two_class(n: usize, seed: u64) -> Dataset {
    let schema = LabelSchema::new(
        TaskKind::Tc,
        "toy topics",
        vec![Label::new("weather"), Label::new("markets")],
    )
    .unwrap();
    let weather = ["rain", "cloud", "storm", "sunny", "breeze"];
    let markets = ["stocks", "bonds", "prices", "index", "shares"];
    let fillers = ["the", "daily", "note", "covers", "updates", "about"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut examples = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % 2;
        let words = if class == 0 { &weather } else { &markets };
        let marker = words[rng.random_range(0..words.len())];
        let text = format!(
            "{} {} {} {} {}",
            fillers[rng.random_range(0..fillers.len())],
            fillers[rng.random_range(0..fillers.len())],
            marker,
            fillers[rng.random_range(0..fillers.len())],
            marker,
        );
        let label = if class == 0 { "weather" } else { "markets" };
        examples.push(LabeledExample::tc(text, label, Provenance::User));
    }
    Dataset::new(schema, examples).unwrap()
}

#[test]
fn separable_tc_task_reaches_near_perfect_train_accuracy() {
    let data = separable_two_class(100, 1234);
    let model_cfg = ModelConfig::for_schema(data.schema(), 256, 16, 0, 32);
    let (encoded, _) = encode_dataset(&data, &model_cfg).unwrap();
    let mut model = init_model(model_cfg, 5).unwrap();
    let tc = TrainConfig {
        learning_rate: 1.5,
        epochs: 40,
        patience: 5,
        batch_size: 10,
        dev_fraction: 0.1,
        rng_seed: 5,
    };
    train(&mut model, &encoded, &tc, standard_dev_metric).unwrap();

    let report = evaluate_model(&model, &data).unwrap();
    let accuracy = report.accuracy.unwrap();
    assert!(accuracy >= 0.99, "train accuracy {accuracy}");
}

/// Tiny NER task where "paris" is always a location; after training the
/// model must tag it in an unseen sentence.
#[test]
fn trained_tagger_finds_the_location_span() {
    let schema = LabelSchema::new(
        TaskKind::Ner,
        "travel",
        vec![Label::new("person"), Label::new("location")],
    )
    .unwrap();
    let people = ["anna", "boris", "clara", "dmitri", "elena", "felix"];
    let verbs = ["visited", "left", "loves", "painted", "praised"];
    let mut examples = Vec::new();
    for (i, person) in people.iter().enumerate() {
        for (j, verb) in verbs.iter().enumerate() {
            let text = format!("{person} {verb} paris");
            let p_len = person.chars().count();
            let v_len = verb.chars().count();
            let city_start = p_len + v_len + 2;
            examples.push(LabeledExample::ner(
                text,
                vec![
                    EntitySpan::new(0, p_len, "person", *person),
                    EntitySpan::new(city_start, city_start + 5, "location", "paris"),
                ],
                Provenance::User,
            ));
            // A negative with neither of the markers, for balance.
            if (i + j) % 3 == 0 {
                examples.push(LabeledExample::ner(
                    format!("the weather {verb} nothing"),
                    vec![],
                    Provenance::User,
                ));
            }
        }
    }
    let data = Dataset::new(schema.clone(), examples).unwrap();
    let model_cfg = ModelConfig::for_schema(&schema, 128, 16, 1, 32);
    let (encoded, stats) = encode_dataset(&data, &model_cfg).unwrap();
    assert_eq!(stats.unalignable, 0);
    let mut model = init_model(model_cfg, 9).unwrap();
    let tc = TrainConfig {
        learning_rate: 0.5,
        epochs: 40,
        patience: 5,
        batch_size: 8,
        dev_fraction: 0.1,
        rng_seed: 9,
    };
    train(&mut model, &encoded, &tc, standard_dev_metric).unwrap();

    let prediction = predict(&model, "gustav visited paris", &schema);
    let spans = prediction.entities().unwrap();
    assert!(
        spans
            .iter()
            .any(|s| s.mention == "paris" && s.label == "location"),
        "spans were {spans:?}"
    );

    // All-O sequences decode to zero spans.
    let nothing = predict(&model, "the weather visited nothing", &schema);
    assert!(
        nothing.entities().unwrap().iter().all(|s| s.label != "person"),
        "unexpected person span in {nothing:?}"
    );
}
