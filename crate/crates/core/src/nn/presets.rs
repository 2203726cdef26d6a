use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::layer::LayerSpec;
use super::network::Network;
use crate::error::{Error, Result};

/// Named reference architectures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    /// Two conv(5x5) → maxpool → tanh blocks, then dense 120 → 84 → C. 32x32 input.
    #[serde(rename = "lenet5")]
    Lenet5,
    /// Three conv(3x3) → batchnorm → relu → maxpool blocks, then dense
    /// layers with dropout 0.5. 32x32 input.
    #[serde(rename = "alexnet-mini")]
    AlexnetMini,
    /// Under a thousand parameters on 8x8 input; covers every layer kind.
    #[serde(rename = "tiny-cnn")]
    TinyCnn,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Lenet5, Preset::AlexnetMini, Preset::TinyCnn];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Lenet5 => "lenet5",
            Preset::AlexnetMini => "alexnet-mini",
            Preset::TinyCnn => "tiny-cnn",
        }
    }

    /// Spatial input size `(height, width)` images are resized to.
    pub fn input_size(self) -> (usize, usize) {
        match self {
            Preset::Lenet5 | Preset::AlexnetMini => (32, 32),
            Preset::TinyCnn => (8, 8),
        }
    }

    pub fn layers(self, in_channels: usize, num_classes: usize) -> Vec<LayerSpec> {
        match self {
            Preset::Lenet5 => vec![
                LayerSpec::conv(in_channels, 6, 5, 0),
                LayerSpec::pool(2),
                LayerSpec::tanh(),
                LayerSpec::conv(6, 16, 5, 0),
                LayerSpec::pool(2),
                LayerSpec::tanh(),
                LayerSpec::Flatten,
                LayerSpec::dense(16 * 5 * 5, 120),
                LayerSpec::tanh(),
                LayerSpec::dense(120, 84),
                LayerSpec::tanh(),
                LayerSpec::dense(84, num_classes),
            ],
            Preset::AlexnetMini => {
                let block = |ci, co| {
                    [
                        LayerSpec::conv(ci, co, 3, 1),
                        LayerSpec::BatchNorm { features: co },
                        LayerSpec::relu(),
                        LayerSpec::pool(2),
                    ]
                };
                let mut layers = Vec::new();
                layers.extend(block(in_channels, 8));
                layers.extend(block(8, 16));
                layers.extend(block(16, 32));
                layers.extend([
                    LayerSpec::Flatten,
                    LayerSpec::Dropout { p: 0.5 },
                    LayerSpec::dense(32 * 4 * 4, 128),
                    LayerSpec::relu(),
                    LayerSpec::Dropout { p: 0.5 },
                    LayerSpec::dense(128, 64),
                    LayerSpec::relu(),
                    LayerSpec::dense(64, num_classes),
                ]);
                layers
            }
            Preset::TinyCnn => vec![
                LayerSpec::conv(in_channels, 4, 3, 1),
                LayerSpec::BatchNorm { features: 4 },
                LayerSpec::relu(),
                LayerSpec::pool(2),
                LayerSpec::conv(4, 6, 3, 0),
                LayerSpec::tanh(),
                LayerSpec::Flatten,
                LayerSpec::Dropout { p: 0.25 },
                LayerSpec::dense(6 * 2 * 2, 16),
                LayerSpec::tanh(),
                LayerSpec::dense(16, num_classes),
            ],
        }
    }

    pub fn build(self, in_channels: usize, num_classes: usize, seed: u64) -> Result<Network> {
        let (h, w) = self.input_size();
        Network::new(self.layers(in_channels, num_classes), [in_channels, h, w], seed)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::ConfigInvalid(format!("unknown architecture preset {s:?}")))
    }
}
