//! Channel fixtures shared by the benchmarks.

use vlftbc_core::{BroadcastChannel, ChannelMatrix};

/// BSC(0.2) as the weak branch and BSC(0.1) as the strong one.
pub fn bsc_pair() -> BroadcastChannel {
    BroadcastChannel::new(vec![ChannelMatrix::bsc(0.2).unwrap(), ChannelMatrix::bsc(0.1).unwrap()]).unwrap()
}

/// Three branches with ternary input, no ordering between them.
pub fn ternary_triple() -> BroadcastChannel {
    let rows = |r: [[f64; 3]; 3]| ChannelMatrix::new(r.iter().map(|x| x.to_vec()).collect()).unwrap();
    BroadcastChannel::new(vec![
        rows([[0.7, 0.2, 0.1], [0.15, 0.7, 0.15], [0.2, 0.25, 0.55]]),
        rows([[0.6, 0.3, 0.1], [0.1, 0.8, 0.1], [0.3, 0.1, 0.6]]),
        rows([[0.8, 0.1, 0.1], [0.25, 0.5, 0.25], [0.1, 0.3, 0.6]]),
    ])
    .unwrap()
}
