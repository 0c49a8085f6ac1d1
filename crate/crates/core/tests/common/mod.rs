#![allow(dead_code)]

use sensedict::Embedding;

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// All permutations of `0..n` (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k - 1 {
            heap(k - 1, a, out);
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
        heap(k - 1, a, out);
    }
    let mut out = Vec::new();
    heap(n, &mut (0..n).collect(), &mut out);
    out
}

/// Distances centroid→mean under the assignment minimizing their sum, found
/// by exhaustive search. `None` when the counts differ.
pub fn best_matching(centroids: &[Embedding], means: &[Embedding]) -> Option<Vec<f64>> {
    if centroids.len() != means.len() {
        return None;
    }
    permutations(means.len())
        .into_iter()
        .map(|p| {
            centroids
                .iter()
                .zip(&p)
                .map(|(c, &m)| euclid(c, &means[m]))
                .collect::<Vec<f64>>()
        })
        .min_by(|a, b| a.iter().sum::<f64>().total_cmp(&b.iter().sum::<f64>()))
}

pub fn naive_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sensedict::dictionary::{build_dictionary, BuildConfig, SenseDictionary};
use sensedict::distill::{Activation, Gradients, StudentModel};
use sensedict::store::OccurrenceRecord;
use sensedict::synthetic::{random_orthogonal, CorpusSpec, SyntheticCorpus};

fn act(a: Activation, x: f64) -> f64 {
    match a {
        Activation::Identity => x,
        Activation::Relu => {
            if x > 0.0 {
                x
            } else {
                0.0
            }
        }
        Activation::Tanh => x.tanh(),
    }
}

/// Student output computed with explicit index loops.
#[allow(clippy::needless_range_loop)]
pub fn oracle_forward(m: &StudentModel, x: &[f64]) -> Vec<f64> {
    let hidden: Vec<f64> = if m.hidden_dim == 0 {
        x.to_vec()
    } else {
        (0..m.hidden_dim)
            .map(|r| {
                let mut s = m.b1[r];
                for c in 0..m.feature_dim {
                    s += m.w1[r * m.feature_dim + c] * x[c];
                }
                act(m.activation, s)
            })
            .collect()
    };
    (0..m.teacher_dim)
        .map(|r| {
            let mut s = m.b2[r];
            for c in 0..hidden.len() {
                s += m.w2[r * hidden.len() + c] * hidden[c];
            }
            s
        })
        .collect()
}

/// Cross-entropy via log-sum-exp, independent of the library's softmax.
pub fn oracle_loss(m: &StudentModel, senses: &[Embedding], x: &[f64], label: usize) -> f64 {
    let n = oracle_forward(m, x);
    let z: Vec<f64> = senses.iter().map(|s| naive_dot(s, &n)).collect();
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    lse - z[label]
}

/// Largest per-tensor relative error between `analytic` and central finite
/// differences of [`oracle_loss`].
pub fn gradient_rel_error(
    m: &StudentModel,
    senses: &[Embedding],
    x: &[f64],
    label: usize,
    analytic: &Gradients,
) -> f64 {
    const H: f64 = 1e-5;
    let mut worst = 0.0f64;
    for t in 0..4 {
        let len = [m.w1.len(), m.b1.len(), m.w2.len(), m.b2.len()][t];
        let mut fd = vec![0.0; len];
        for (i, slot) in fd.iter_mut().enumerate() {
            let mut plus = m.clone();
            let mut minus = m.clone();
            [&mut plus.w1, &mut plus.b1, &mut plus.w2, &mut plus.b2][t][i] += H;
            [&mut minus.w1, &mut minus.b1, &mut minus.w2, &mut minus.b2][t][i] -= H;
            *slot = (oracle_loss(&plus, senses, x, label) - oracle_loss(&minus, senses, x, label))
                / (2.0 * H);
        }
        let a = analytic.tensors()[t];
        let diff = a
            .iter()
            .zip(&fd)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt();
        let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nf = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
        worst = worst.max(diff / na.max(nf).max(1e-12));
    }
    worst
}

/// Random gradient-check instance: (model, senses, features, label).
pub fn gradient_instance(
    rng: &mut ChaCha8Rng,
    feature_dim: usize,
    hidden_dim: usize,
    teacher_dim: usize,
    k: usize,
) -> (StudentModel, Vec<Embedding>, Vec<f64>, usize) {
    let act = [Activation::Tanh, Activation::Identity][rng.random_range(0..2)];
    let mut m = StudentModel::init(feature_dim, hidden_dim, teacher_dim, act, rng.random());
    for v in m.b1.iter_mut().chain(m.b2.iter_mut()) {
        *v = rng.random_range(-0.5..0.5);
    }
    let senses = (0..k)
        .map(|_| {
            (0..teacher_dim)
                .map(|_| rng.random_range(-1.0..1.0))
                .collect()
        })
        .collect();
    let x = (0..feature_dim)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let label = rng.random_range(0..k);
    (m, senses, x, label)
}

/// Teacher stream from the synthetic corpus, student features `Rᵀ·t + noise`.
pub struct DistillTask {
    pub dict: SenseDictionary,
    pub teacher: Vec<OccurrenceRecord>,
    pub features: Vec<OccurrenceRecord>,
}

pub fn distill_task(spec: &CorpusSpec, noise: f64, seed: u64) -> DistillTask {
    let corpus = SyntheticCorpus::generate(spec);
    let d = corpus.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = random_orthogonal(d, &mut rng);
    let features = corpus
        .records
        .iter()
        .map(|rec| {
            let f = (0..d)
                .map(|i| {
                    let rt: f64 = (0..d).map(|j| r[j * d + i] * rec.embedding[j]).sum();
                    let e: f64 = StandardNormal.sample(&mut rng);
                    rt + noise * e
                })
                .collect();
            OccurrenceRecord {
                token: rec.token,
                embedding: f,
            }
        })
        .collect();
    let dict = build_dictionary(
        d,
        &corpus.records,
        &BuildConfig::fixed_k(spec.senses_per_token, seed),
    )
    .unwrap();
    DistillTask {
        dict,
        teacher: corpus.records,
        features,
    }
}

/// Average rank of each value by counting: (#smaller) + (#equal + 1) / 2.
pub fn oracle_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let less = v.iter().filter(|&&y| y < x).count() as f64;
            let equal = v.iter().filter(|&&y| y == x).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn oracle_pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
    cov / (va * vb).sqrt()
}

pub fn oracle_spearman(a: &[f64], b: &[f64]) -> f64 {
    oracle_pearson(&oracle_ranks(a), &oracle_ranks(b))
}

/// Random scores where about `tie_mass` of the entries copy an earlier entry.
pub fn tied_scores(rng: &mut ChaCha8Rng, len: usize, tie_mass: f64) -> Vec<f64> {
    let mut v: Vec<f64> = Vec::with_capacity(len);
    for i in 0..len {
        if i > 0 && rng.random::<f64>() < tie_mass {
            let j = rng.random_range(0..i);
            v.push(v[j]);
        } else {
            v.push(rng.random_range(0.0..10.0));
        }
    }
    v
}
