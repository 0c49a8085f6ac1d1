//! Trains a student whose outputs pick the same senses as a teacher, then runs sense-selection inference.
//!
//! The student sees a rotated, noisy copy of the teacher embeddings, so a
//! linear alignment map is enough to recover the teacher's choices.
//!
//! cargo run --release --example sense_distillation

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sensedict::dictionary::{build_dictionary, BuildConfig};
use sensedict::distill::{
    self, infer_embeddings, infer_labels, train, Activation, StudentArch, TrainConfig,
};
use sensedict::replacement::teacher_label;
use sensedict::store::OccurrenceRecord;
use sensedict::synthetic::{random_orthogonal, CorpusSpec, SyntheticCorpus};

fn main() -> sensedict::Result<()> {
    let corpus = SyntheticCorpus::generate(&CorpusSpec {
        tokens: 30,
        occurrences_per_token: 120,
        ..Default::default()
    });
    let d = corpus.dim;
    let dict = build_dictionary(d, &corpus.records, &BuildConfig::fixed_k(3, 0))?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rotation = random_orthogonal(d, &mut rng);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let features: Vec<OccurrenceRecord> = corpus
        .records
        .iter()
        .map(|r| {
            let f = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| rotation[j * d + i] * r.embedding[j])
                        .sum::<f64>()
                        + noise.sample(&mut rng)
                })
                .collect();
            OccurrenceRecord {
                token: r.token,
                embedding: f,
            }
        })
        .collect();

    let config = TrainConfig {
        epochs: 15,
        learning_rate: 1e-2,
        ..Default::default()
    };
    for arch in [
        StudentArch::default(),
        StudentArch {
            hidden_dim: 32,
            activation: Activation::Tanh,
        },
    ] {
        let outcome = train(&corpus.records, &features, &dict, arch, &config)?;
        println!("hidden {} ({}):", arch.hidden_dim, arch.activation);
        for s in outcome.trace.iter().step_by(5) {
            println!(
                "  epoch {:>2}  loss {:.4}  agreement {:.3}",
                s.epoch, s.mean_loss, s.agreement
            );
        }

        let labels = infer_labels(&outcome.model, &dict, &features)?;
        let agree = corpus
            .records
            .iter()
            .zip(&labels)
            .filter(|(t, l)| teacher_label(&dict, t.token, &t.embedding).ok() == **l)
            .count();
        println!(
            "  inference agrees with the teacher on {agree} of {} records",
            labels.len()
        );

        let bytes = distill::to_bytes(&outcome.model)?;
        println!(
            "  model file: {} bytes, {} parameters",
            bytes.len(),
            outcome.model.parameter_count()
        );
    }

    let untrained = distill::StudentModel::init(d, 0, d, Activation::Identity, 1);
    let embedded = infer_embeddings(&untrained, &dict, &features[..3])?;
    for (token, sense, _) in embedded {
        println!("untrained student: token {token} -> sense {sense:?}");
    }
    Ok(())
}
