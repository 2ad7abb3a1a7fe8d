//! Load a labeled text corpus against a whitespace-separated embedding
//! file: documents are padded or truncated to a fixed length and unknown
//! tokens fall back to the mask token.
//!
//! ```bash
//! cargo run --example text_data
//! ```

use cfeval::dataset::{load_text_with_stats, FeatureKind};

const EMBEDDINGS: &str = "\
good 0.9 0.4 0.1
great 1.0 0.5 0.2
bad -0.8 -0.5 -0.1
awful -1.0 -0.6 -0.2
film 0.1 0.0 0.05
a 0.0 0.1 0.0
<unk> 0.0 0.0 0.0
";

const CORPUS: &str = "\
1\ta great film
0\tawful film
1\tgood good great
0\ta thoroughly bad film
";

fn main() {
    let dir = std::env::temp_dir().join("cfeval-text-example");
    std::fs::create_dir_all(&dir).expect("writable temp dir");
    let emb_path = dir.join("embeddings.txt");
    let corpus_path = dir.join("corpus.tsv");
    std::fs::write(&emb_path, EMBEDDINGS).unwrap();
    std::fs::write(&corpus_path, CORPUS).unwrap();

    let max_len = 5;
    let (dataset, stats) =
        load_text_with_stats(&corpus_path, &emb_path, max_len).expect("well-formed input");
    println!(
        "loaded {} documents as {} token positions x {} dims each",
        dataset.len(),
        dataset.schema().feature_count(),
        dataset.schema().width() / dataset.schema().feature_count()
    );
    println!(
        "ingestion: {} out-of-vocabulary tokens, {} padded, {} truncated",
        stats.oov_tokens, stats.padded_docs, stats.truncated_docs
    );

    let tokens = match &dataset.schema().feature(0).kind {
        FeatureKind::Embedded { tokens, .. } => tokens.clone(),
        _ => unreachable!("text loader builds embedded features"),
    };
    for (i, inst) in dataset.instances().iter().enumerate() {
        let words: Vec<&str> = inst.values.iter().map(|&t| tokens[t].as_str()).collect();
        println!(
            "doc {i} (label {}): {}",
            inst.gold_label.expect("corpus is labeled"),
            words.join(" ")
        );
    }
}
