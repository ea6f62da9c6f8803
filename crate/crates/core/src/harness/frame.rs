//! One simulated transmission.
//!
//! Randomness is consumed in a fixed order: the data lane yields the `K`
//! message bits, then the noise lane yields `N` standard normals.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{add_noise, channel_llr, modulate, trial_rng, Lane};
use crate::demapper::LLR_CAP;
use crate::encoder::{conv_encode, insert_profile, polar_transform_in_place};
use crate::rate_profile::CodeSpec;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseModel {
    /// LLRs saturated at the cap with the transmitted sign.
    Noiseless,
    Awgn {
        sigma2: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Frame {
    pub data: Vec<u8>,
    pub v: Vec<u8>,
    pub u: Vec<u8>,
    pub x: Vec<u8>,
    pub llrs: Vec<f64>,
}

pub fn make_frame(
    spec: &CodeSpec,
    noise: NoiseModel,
    master_seed: u64,
    trial: u64,
) -> Result<Frame> {
    let mut data_rng = trial_rng(master_seed, trial, Lane::Data);
    let data: Vec<u8> = (0..spec.k_info)
        .map(|_| u8::from(data_rng.random::<bool>()))
        .collect();
    let v = insert_profile(&data, spec)?;
    let u = conv_encode(&v, &spec.conn_poly);
    let mut x = u.clone();
    polar_transform_in_place(&mut x);
    let llrs = match noise {
        NoiseModel::Noiseless => x
            .iter()
            .map(|&b| if b == 0 { LLR_CAP } else { -LLR_CAP })
            .collect(),
        NoiseModel::Awgn { sigma2 } => {
            let mut y = modulate(&x);
            add_noise(
                &mut y,
                sigma2,
                &mut trial_rng(master_seed, trial, Lane::Noise),
            );
            channel_llr(&y, sigma2)
        }
    };
    Ok(Frame {
        data,
        v,
        u,
        x,
        llrs,
    })
}
