//! Versioned JSON format for trained networks.

use oilcast_core::network::{Layout, Network};
use oilcast_core::transform::ScaleParams;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT: &str = "oilcast-network";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub format: String,
    pub version: u32,
    pub layout: Layout,
    /// Flattened `W1, b1, W2, b2`.
    pub params: Vec<f64>,
    pub seed: u64,
    /// Maps network outputs back to the transformed target scale.
    pub target_scale: Option<ScaleParams>,
    /// Source of each input column, e.g. `spot lag 0`.
    pub inputs: Vec<String>,
}

impl NetworkFile {
    pub fn new(net: &Network, seed: u64, target_scale: Option<ScaleParams>, inputs: Vec<String>) -> Self {
        Self {
            format: FORMAT.into(),
            version: VERSION,
            layout: *net.layout(),
            params: net.params().to_vec(),
            seed,
            target_scale,
            inputs,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("network serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetworkFile =
            serde_json::from_str(text).map_err(|source| Error::Json { context: "network file".into(), source })?;
        if file.format != FORMAT || file.version != VERSION {
            return Err(Error::Report(format!("unsupported network format {} v{}", file.format, file.version)));
        }
        if let Some(s) = file.target_scale {
            ScaleParams::new(s.min_val(), s.max_val())?;
        }
        Ok(file)
    }

    pub fn network(&self) -> Result<Network> {
        let l = self.layout;
        let layout = Layout::new(l.n_inputs, l.n_hidden, l.n_outputs, l.hidden_activation)?;
        Ok(Network::from_params(layout, self.params.clone())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use oilcast_core::network::Activation;

    #[test]
    fn round_trips_bit_for_bit() {
        let layout = Layout::new(3, 4, 1, Activation::Tanh).unwrap();
        let net = Network::init(layout, 17);
        let scale = ScaleParams::new(-0.031, 0.027).unwrap();
        let file = NetworkFile::new(&net, 17, Some(scale), vec!["spot lag 0".into()]);
        let back = NetworkFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.network().unwrap(), net);
    }

    #[test]
    fn rejects_other_formats() {
        let layout = Layout::new(1, 1, 1, Activation::Tanh).unwrap();
        let mut file = NetworkFile::new(&Network::init(layout, 0), 0, None, vec![]);
        file.version = 2;
        assert!(NetworkFile::from_json(&file.to_json()).is_err());
        file.version = 1;
        file.params.pop();
        assert!(NetworkFile::from_json(&file.to_json()).unwrap().network().is_err());
    }
}
