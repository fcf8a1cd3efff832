use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vecforge::embedding::{Matrix, WordVectors};
use vecforge::eval::{make_synthetic, SynthConfig, SyntheticData};
use vecforge::train::init_from_pretrained;
use vecforge::{cosine, infer_document, train, Corpus, Hyperparams, InferParams, Mode, Trainer};

fn small_synth() -> SyntheticData {
    make_synthetic(&SynthConfig { docs_per_topic: 25, seed: 3, ..SynthConfig::default() })
}

fn small_params(mode: Mode) -> Hyperparams {
    Hyperparams {
        vector_size: 16,
        window: 3,
        min_count: 1,
        subsample_t: 1e-3,
        epochs: 5,
        seed: 11,
        ..Hyperparams::for_mode(mode)
    }
}

#[test]
fn early_epoch_loss_does_not_rise() {
    let data = small_synth();
    for mode in Mode::ALL {
        let params = small_params(mode);
        let corpus = Corpus::from_raw(&data.documents, params.min_count, params.subsample_t).unwrap();
        let outcome = Trainer::new(params).fit(&corpus, None).unwrap();
        let losses: Vec<f64> = outcome.epochs.iter().map(|e| e.mean_loss).collect();
        assert_eq!(losses.len(), 5);
        for w in losses.windows(2) {
            assert!(w[1] <= w[0] * 1.02, "{mode:?}: loss rose from {} to {} ({losses:?})", w[0], w[1]);
        }
    }
}

#[test]
fn single_worker_runs_are_identical() {
    let data = small_synth();
    for mode in Mode::ALL {
        let params = Hyperparams { epochs: 2, ..small_params(mode) };
        let corpus = Corpus::from_raw(&data.documents, 1, params.subsample_t).unwrap();
        assert_eq!(train(&corpus, &params, None).unwrap(), train(&corpus, &params, None).unwrap());
    }
}

#[test]
fn dbow_without_word_learning_keeps_input_vectors() {
    let data = small_synth();
    let params = Hyperparams { dbow_train_words: false, ..small_params(Mode::Dbow) };
    let corpus = Corpus::from_raw(&data.documents, 1, params.subsample_t).unwrap();
    let before = vecforge::train::initialize(&corpus, &params).unwrap();
    let after = train(&corpus, &params, None).unwrap();
    assert_eq!(before.w_in(), after.w_in());
    assert_ne!(before.docs(), after.docs());
}

#[test]
fn content_words_align_with_documents() {
    let data = make_synthetic(&SynthConfig { docs_per_topic: 50, seed: 5, ..SynthConfig::default() });
    let params = Hyperparams {
        vector_size: 32,
        window: 5,
        min_count: 1,
        subsample_t: 1e-4,
        epochs: 40,
        seed: 2,
        ..Hyperparams::for_mode(Mode::Dbow)
    };
    let corpus = Corpus::from_raw(&data.documents, 1, params.subsample_t).unwrap();
    let model = train(&corpus, &params, None).unwrap();
    let vocab = model.vocabulary();

    let (mut content_sum, mut function_sum) = (0.0, 0.0);
    for (doc, &topic) in data.documents.iter().zip(&data.topics) {
        let d = model.doc_vector(&doc.tag).unwrap();
        let mean_cos = |surfaces: &mut dyn Iterator<Item = String>| {
            let rows: Vec<usize> = surfaces.filter_map(|s| vocab.position(&s)).collect();
            rows.iter().map(|&r| cosine(d, model.w_out().row(r)).unwrap()).sum::<f64>() / rows.len() as f64
        };
        let cfg = SynthConfig::default();
        content_sum += mean_cos(&mut (0..cfg.vocab_per_topic).map(|i| SyntheticData::content_word(topic, i)));
        function_sum += mean_cos(&mut (0..cfg.n_function_words).map(SyntheticData::function_word));
    }
    let n = data.documents.len() as f64;
    assert!(
        content_sum / n > function_sum / n,
        "content {} vs function {}",
        content_sum / n,
        function_sum / n
    );
}

#[test]
fn pretrained_rows_replace_exactly_the_covered_words() {
    let docs = vec![vecforge::RawDocument::new("d", ["a", "b", "c", "d", "e"].map(String::from).to_vec())];
    let corpus = Corpus::from_raw(&docs, 1, 1.0).unwrap();
    let params = Hyperparams { vector_size: 3, window: 1, min_count: 1, epochs: 1, ..Hyperparams::for_mode(Mode::SkipGram) };
    let mut model = vecforge::train::initialize(&corpus, &params).unwrap();
    let before = model.clone();
    let pre = WordVectors {
        tokens: ["b", "zz", "d", "e"].map(String::from).to_vec(),
        vectors: Matrix::from_vec(4, 3, (0..12).map(|x| x as f32).collect()).unwrap(),
    };
    let coverage = init_from_pretrained(&mut model, &pre).unwrap();
    assert_eq!((coverage.matched, coverage.vocab_size), (3, 5));
    let changed = ["a", "b", "c", "d", "e"]
        .iter()
        .filter(|w| model.word_vector(w) != before.word_vector(w))
        .count();
    assert_eq!(changed, 3);
    assert_eq!(model.word_vector("d").unwrap(), &[6.0, 7.0, 8.0]);

    let wrong = WordVectors { tokens: vec!["a".into()], vectors: Matrix::zeros(1, 4) };
    assert!(init_from_pretrained(&mut model, &wrong).is_err());
}

#[test]
fn inference_leaves_model_untouched() {
    let data = small_synth();
    let params = Hyperparams { epochs: 3, ..small_params(Mode::Dmpv) };
    let corpus = Corpus::from_raw(&data.documents, 1, params.subsample_t).unwrap();
    let model = train(&corpus, &params, None).unwrap();
    let mut bytes_before = Vec::new();
    vecforge::embedding::write_model(&model, &mut bytes_before).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for doc in data.documents.iter().take(5) {
        let ip = InferParams { epochs: 20, ..InferParams::default() };
        infer_document(&model, &doc.tokens, &ip, &mut rng).unwrap();
    }
    let mut bytes_after = Vec::new();
    vecforge::embedding::write_model(&model, &mut bytes_after).unwrap();
    assert_eq!(bytes_before, bytes_after);
}
