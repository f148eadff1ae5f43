"""n-stage LDA: collapsed Gibbs LDA with iterative dictionary pruning."""
