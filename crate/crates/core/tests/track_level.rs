//! Track-level model entry points driven through the real pipeline:
//! corpus → labeling → history windows → tracks → forward passes.

use fpe_core::corpus::{ingest_corpus, UserId};
use fpe_core::encoding::{Encoder, ReferenceEncoder};
use fpe_core::history::{
    build_reading_track, build_writing_track, select_static_history, HistoryConfig, HistoryKind,
};
use fpe_core::labeling::{label_corpus, ClassThresholds, LabelerSpec};
use fpe_core::models::{
    dynamic_fpe_forward, gru_forward, static_fpe_forward, DynamicFpe, DynamicFpeConfig, Fingerprint,
    GruStack, ModelKind, StaticFpe, StaticFpeConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

const DIM: usize = 32;

fn fixture() -> fpe_core::corpus::Corpus {
    let mut lines = Vec::new();
    let titles = [
        "senate passes the budget",
        "markets rally on earnings",
        "wildfire reaches the coast",
        "new encryption standard lands",
        "senate blocks the amendment",
    ];
    for (i, title) in titles.iter().enumerate() {
        lines.push(format!(
            r#"{{"kind":"article","article_id":"a{i}","title":"{title}","published_at":"2020-01-01T00:00:00Z","outlet":"desk"}}"#
        ));
    }
    let bodies = [
        "great progress wonderful outcome",
        "terrible mess awful process",
        "plain report about events",
        "love the brilliant work",
        "horrible failure sad day",
    ];
    for (i, body) in bodies.iter().enumerate() {
        lines.push(format!(
            r#"{{"kind":"comment","comment_id":"c{i}","user_id":"u","article_id":"a{i}","body":"{body}","created_at":"2020-01-02T0{i}:00:00Z"}}"#
        ));
    }
    let corpus = ingest_corpus(lines.join("\n").as_bytes(), false).unwrap();
    label_corpus(&corpus, &[LabelerSpec::Lexicon]).unwrap()
}

#[test]
fn static_and_dynamic_track_forward() {
    let corpus = fixture();
    let timeline = &corpus.timelines[&UserId("u".into())];
    let encoder = ReferenceEncoder::new(DIM).unwrap();
    let thresholds = ClassThresholds::default();
    let window = select_static_history(timeline, 4, 3).unwrap();
    assert_eq!(window.kind, HistoryKind::Static);

    let writing =
        build_writing_track(&corpus, timeline, &window, &encoder, "lexicon", thresholds).unwrap();
    let target_cls = encoder
        .encode_single(corpus.title(&timeline.interactions[4].article_id))
        .unwrap();

    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let static_model = StaticFpe::init(
        StaticFpeConfig {
            embed_dim: DIM,
            hidden_dim: 10,
            classes: 3,
        },
        &mut rng,
    );
    let reading_static = build_reading_track(
        &corpus, timeline, &window, ModelKind::StaticFpe, &encoder, "lexicon", thresholds,
    )
    .unwrap();
    let (step_logits, final_logits, fingerprint) =
        static_fpe_forward(&static_model, &reading_static, &writing, &target_cls).unwrap();
    assert_eq!(step_logits.len(), 3);
    assert_eq!(final_logits.len(), 3);
    match fingerprint {
        Fingerprint::Static(h) => assert_eq!(h.len(), 10),
        other => panic!("wrong fingerprint kind {other:?}"),
    }

    let dynamic_model = DynamicFpe::init(
        DynamicFpeConfig {
            embed_dim: DIM,
            hidden_dim: 10,
            classes: 3,
        },
        &mut rng,
    );
    let reading_dynamic = build_reading_track(
        &corpus, timeline, &window, ModelKind::DynamicFpe, &encoder, "lexicon", thresholds,
    )
    .unwrap();
    let (step_logits, final_logits, fingerprint) =
        dynamic_fpe_forward(&dynamic_model, &reading_dynamic, &writing, &target_cls).unwrap();
    assert_eq!(step_logits.len(), 3);
    assert_eq!(final_logits.len(), 3);
    match fingerprint {
        Fingerprint::Dynamic { reading, writing } => {
            assert_eq!(reading.len(), 10);
            assert_eq!(writing.len(), 10);
        }
        other => panic!("wrong fingerprint kind {other:?}"),
    }
}

#[test]
fn bare_gru_forward_over_track_embeddings() {
    let corpus = fixture();
    let timeline = &corpus.timelines[&UserId("u".into())];
    let encoder = ReferenceEncoder::new(DIM).unwrap();
    let window = select_static_history(timeline, 4, 4).unwrap();
    let track = build_writing_track(
        &corpus, timeline, &window, &encoder, "lexicon", ClassThresholds::default(),
    )
    .unwrap();

    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let stack = GruStack::init("g", DIM, 6, 2, &mut rng);
    let (states, final_hidden) = gru_forward(&stack, &track.vectors).unwrap();
    assert_eq!(states.len(), 4);
    assert_eq!(final_hidden.len(), 6);
    assert_eq!(states.last().unwrap(), &final_hidden);
}
