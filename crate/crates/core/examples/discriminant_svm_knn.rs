//! Plug-in classifiers on two overlapping Gaussian clouds.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use spatial_classify::classify::{
    classify, decision_da, fit_discriminant, knn_c, svm_decision, svm_fit, DaKind, DecisionScore, Kernel, SvmConfig, TieBreak,
};
use spatial_classify::sampler::RngStream;

fn cloud(n: usize, centre: [f64; 2], spread: f64, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            centre
                .iter()
                .map(|c| {
                    let e: f64 = StandardNormal.sample(rng);
                    c + spread * e
                })
                .collect()
        })
        .collect()
}

fn error(scores: &[DecisionScore], y: &[u8]) -> f64 {
    let wrong = scores
        .iter()
        .zip(y)
        .filter(|(s, &l)| classify(s, TieBreak::Zero).expect("finite score") != l)
        .count();
    wrong as f64 / y.len() as f64
}

fn main() -> spatial_classify::Result<()> {
    let mut rng = RngStream::new(3, 0).rng();
    let mut x = cloud(60, [0.0, 0.0], 1.0, &mut rng);
    x.extend(cloud(60, [1.5, 1.0], 1.6, &mut rng));
    let y: Vec<u8> = (0..120).map(|i| u8::from(i >= 60)).collect();
    let mut probe = cloud(200, [0.0, 0.0], 1.0, &mut rng);
    probe.extend(cloud(200, [1.5, 1.0], 1.6, &mut rng));
    let truth: Vec<u8> = (0..400).map(|i| u8::from(i >= 200)).collect();

    for kind in [DaKind::Lda, DaKind::Dlda, DaKind::Qda] {
        let p = fit_discriminant(kind, &y, &x)?;
        let scores: Vec<DecisionScore> = probe.iter().map(|r| decision_da(&p, r)).collect::<Result<_, _>>()?;
        println!("{:<12} test error {:.3}", kind.classifier().tag(), error(&scores, &truth));
    }
    for (kernel, lambda) in [(Kernel::Linear, 1.0), (Kernel::Poly { degree: 3 }, 0.1), (Kernel::Radial { u: 0.5 }, 1.0)] {
        let model = svm_fit(&y, &x, &SvmConfig::new(kernel, lambda))?;
        let scores: Vec<DecisionScore> = probe.iter().map(|r| svm_decision(&model, r)).collect();
        println!(
            "{:<12} test error {:.3} ({} support vectors)",
            scores[0].source.tag(),
            error(&scores, &truth),
            model.support_indices.len()
        );
    }
    for k in [1, 5, 15] {
        let scores: Vec<DecisionScore> = probe.iter().map(|r| knn_c(r, &x, &y, k)).collect::<Result<_, _>>()?;
        println!("knn-c k={k:<5} test error {:.3}", error(&scores, &truth));
    }
    Ok(())
}
