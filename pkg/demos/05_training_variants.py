"""Train each model variant on one synthetic planted-partition dataset.

Generates a 200-node hypergraph whose hyperedges mostly stay inside one
of four classes (homophily 0.9), then trains the residual-identity model,
the plain convolution, the linearized stack, and the graph-free MLP with
identical budgets. At shallow depth all four are competitive; the spread
comes from how much each exploits the hyperedge structure.
"""

from hgx import ModelConfig, SyntheticSpec, generate_synthetic, train

spec = SyntheticSpec(
    num_nodes=200, num_classes=4, num_hyperedges=150, mean_edge_size=4.0,
    homophily=0.9, feature_dim=12, separation=0.8, noise_scale=1.0, seed=1,
)
dataset = generate_synthetic(spec)
print(f"dataset: {dataset.num_nodes} nodes, {dataset.hypergraph.num_edges} edges, "
      f"{dataset.train_mask.size}/{dataset.val_mask.size}/{dataset.test_mask.size} "
      "train/val/test")

for variant in ("deep-hgcn", "hgnn", "shgcn", "mlp"):
    config = ModelConfig(
        variant=variant, num_layers=2, hidden_dim=32, alpha=0.1, lambda_id=0.5,
        dropout=0.5, epochs=200, patience=100, seed=0,
    )
    params, report = train(dataset, config)
    print(f"{variant:10s} test accuracy {report.test_accuracy:.3f} "
          f"(best epoch {report.best_epoch}, "
          f"{len(report.epochs)} epochs, {report.wall_clock_seconds:.1f}s)")
