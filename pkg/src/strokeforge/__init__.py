"""strokeforge: hybrid stroke-based rendering engine.

Three stylization routes over one raster core:

* classical multi-layer painterly rendering (curved-brush, toon quantization),
* gradient-descent stylization against content/style losses over a seeded
  filter-bank feature extractor,
* hybrid stroke planning that fuses rule-based initialization with pluggable
  data-driven refinement, rendered by an anti-aliased stroke compositor.

Exposed as a library, a CLI (``strokeforge``) and an HTTP job service with an
interactive studio frontend.
"""

from .config import PlanConfig, load_config, parse_config, save_config
from .features import (
    FeatureBundle,
    FeatureWeights,
    StrokeCandidate,
    VoronoiPartition,
    compute_saliency,
    estimate_density,
    extract_edges,
    generate_candidates,
    voronoi_partition,
)
from .neural import (
    FeatureTensor,
    FilterBankExtractor,
    GramMatrix,
    StylizeConfig,
    content_loss,
    default_extractor,
    gram,
    style_loss,
    stylize,
    total_loss_and_gradient,
)
from .painterly import (
    BrushModel,
    LayerSpec,
    PainterlyConfig,
    PaintStroke,
    paint_layer,
    quantize_tones,
    render_painterly,
    trace_curved_stroke,
)
from .planio import parse_plan, serialize_plan
from .planning import (
    HybridParams,
    IdentityRefiner,
    LocalSearchRefiner,
    PlanSettings,
    StrokeDefaults,
    blend_correction,
    consistency_score,
    enforce_density,
    init_strokes,
    merge_strokes,
    plan,
    refine,
)
from .raster import (
    GradientField,
    RasterError,
    RasterImage,
    ScalarField,
    convolve2d,
    gaussian_blur,
    gradient_magnitude_and_angle,
    luminance,
    sobel_gradients,
)
from .render import (
    PostProcessing,
    RenderOptions,
    post_process,
    rasterize_stroke,
    render_sequence,
)
from .strokes import Stroke

__version__ = "0.1.0"
