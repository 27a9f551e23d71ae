//! Diet Networks: fat-layer weights predicted from per-SNP embeddings.

mod model;
mod train;

pub use model::{
    loss_diet, DietLoss, DietNetwork, DietOutput, DietTrace, EmbeddingSource, FatLayers, FatWeights,
};
pub use train::{
    evaluate, input_scale, scale_genotypes, scaled_column_means, snapshot, train, Classifier,
    EpochRecord, FoldData, History, TrainConfig,
};

#[cfg(test)]
mod tests;
