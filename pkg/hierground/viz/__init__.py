from hierground.viz.visualize import VisualizationResult, visualize, visualize_checkpoint, write_visualization

__all__ = ["VisualizationResult", "visualize", "visualize_checkpoint", "write_visualization"]
