//! Threshold reports shared by the EXIT-chart and protograph analyses.

use crate::error::Result;
use crate::infotheory::{ebn0_db, shannon_ebn0_db, ChannelParam};
use crate::structure::Rate;

/// One row of a threshold report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRow {
    pub rate: Rate,
    pub sigma2: f64,
    pub ebn0_db: f64,
    pub gap_db: f64,
}

impl ThresholdRow {
    pub fn new(rate: Rate, chan: ChannelParam) -> Result<Self> {
        let r = rate.value();
        let e = ebn0_db(chan, r);
        Ok(ThresholdRow { rate, sigma2: chan.noise_variance(), ebn0_db: e, gap_db: e - shannon_ebn0_db(r)? })
    }
}

pub fn threshold_csv(rows: &[ThresholdRow]) -> String {
    let mut s = String::from("rate,sigma2,ebn0_db,gap_db\n");
    for r in rows {
        s.push_str(&format!("{},{:.8},{:.4},{:.4}\n", r.rate, r.sigma2, r.ebn0_db, r.gap_db));
    }
    s
}

