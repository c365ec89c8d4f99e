//! Compare the analytic gradients against central finite differences.

use ndarray::Array2;
use socmf::prelude::*;

fn main() -> Result<()> {
    let ratings = RatingsTable::from_entries(3, 2, [(0, 0, 4.0), (1, 1, 2.0), (2, 0, 5.0)])?;
    let social = SocialGraph::from_edges(3, [(0, 1), (1, 2), (2, 0), (0, 2)])?;
    let srn = build_srn(ratings, social)?;
    let (lambda, mu) = (0.1, 0.5);
    let model = FactorModel::init(
        3,
        2,
        &Hyperparams {
            k: 2,
            init_scale: 1.0,
            seed: 7,
            ..Hyperparams::default()
        },
    );

    let h = 1e-6;
    let loss = |p: Array2<f64>, q: Array2<f64>| {
        loss_social(&FactorModel::from_factors(p, q).unwrap(), &srn, lambda, mu).unwrap()
    };
    let mut fd_p = Array2::zeros(model.p().raw_dim());
    for idx in ndarray::indices(fd_p.raw_dim()) {
        let (mut plus, mut minus) = (model.p().clone(), model.p().clone());
        plus[idx] += h;
        minus[idx] -= h;
        fd_p[idx] = (loss(plus, model.q().clone()) - loss(minus, model.q().clone())) / (2.0 * h);
    }

    for mode in [SocialGradient::Full, SocialGradient::Printed] {
        let g = grad_p(&model, &srn, lambda, mu, mode)?;
        let err = (&g - &fd_p).mapv(f64::abs).fold(0.0f64, |a, &b| a.max(b));
        println!("grad_p ({mode}): max |analytic - numeric| = {err:.2e}");
    }
    let gq = grad_q(&model, srn.ratings(), lambda)?;
    println!("grad_q:\n{gq:.4}");
    Ok(())
}
