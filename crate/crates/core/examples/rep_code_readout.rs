//! Majority vote over a repetition block and the posterior that it is wrong.

use cluster_qec::rep_code::{majority_vote, posterior_flip_prob};

fn main() -> cluster_qec::Result<()> {
    let q = 0.02;
    for outcomes in [&[false, false, false][..], &[true, false, false], &[true, true, false], &[true, false]] {
        let readout = majority_vote(outcomes, true)?;
        println!(
            "{:?}: flip={} located={} dissent={} P(wrong)={:.3e}",
            outcomes,
            readout.majority_flip,
            readout.located,
            readout.dissent(),
            posterior_flip_prob(outcomes, q)?
        );
    }
    Ok(())
}
