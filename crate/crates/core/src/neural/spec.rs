use std::fmt;

use crate::code::{CheckType, RscCode};
use crate::error::{Error, Result};

/// Extent of a 3D volume along time, height and width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Shape3 {
    pub t: usize,
    pub h: usize,
    pub w: usize,
}

impl Shape3 {
    pub const UNIT: Shape3 = Shape3 { t: 1, h: 1, w: 1 };

    pub fn new(t: usize, h: usize, w: usize) -> Self {
        Self { t, h, w }
    }

    pub fn volume(&self) -> usize {
        self.t * self.h * self.w
    }

    pub fn as_array(&self) -> [usize; 3] {
        [self.t, self.h, self.w]
    }

    /// Output extent of a stride-equals-kernel convolution with zero padding
    /// at the far end of each axis.
    pub fn stepped(&self, kernel: [usize; 3]) -> Shape3 {
        Shape3::new(
            self.t.div_ceil(kernel[0]),
            self.h.div_ceil(kernel[1]),
            self.w.div_ceil(kernel[2]),
        )
    }
}

impl fmt::Display for Shape3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.t, self.h, self.w)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Activation {
    Identity,
    Relu,
    /// Negative slope `2^-shift`.
    LeakyRelu { shift: u8 },
}

impl Activation {
    pub fn tag(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Relu => 1,
            Activation::LeakyRelu { .. } => 2,
        }
    }

    pub fn from_tag(tag: u8, shift: u8) -> Option<Activation> {
        match tag {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Relu),
            2 => Some(Activation::LeakyRelu { shift }),
            _ => None,
        }
    }

    pub fn shift(self) -> u8 {
        match self {
            Activation::LeakyRelu { shift } => shift,
            _ => 0,
        }
    }

    pub fn negative_slope(self) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => 0.0,
            Activation::LeakyRelu { shift } => (-(shift as f64)).exp2(),
        }
    }
}

/// A layer is a stride-equals-kernel 3D convolution. A fully connected layer
/// is the special case of a unit volume whose channels are the inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LayerKind {
    Conv3d {
        in_channels: usize,
        out_channels: usize,
        kernel: [usize; 3],
        input: Shape3,
    },
    Dense {
        inputs: usize,
        outputs: usize,
    },
}

impl LayerKind {
    pub fn tag(&self) -> u8 {
        match self {
            LayerKind::Conv3d { .. } => 0,
            LayerKind::Dense { .. } => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub activation: Activation,
}

/// Connection pattern of a layer in the unified convolution form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Geometry {
    pub in_channels: usize,
    pub out_channels: usize,
    pub in_shape: Shape3,
    pub out_shape: Shape3,
    pub kernel: [usize; 3],
    /// Per output site, `(kernel offset, input site)` of every in-range tap.
    pub taps: Vec<Vec<(usize, usize)>>,
}

impl Geometry {
    pub fn kernel_volume(&self) -> usize {
        self.kernel.iter().product()
    }

    /// Weights feeding one output neuron, padding taps included.
    pub fn fan_in(&self) -> usize {
        self.in_channels * self.kernel_volume()
    }

    pub fn input_len(&self) -> usize {
        self.in_channels * self.in_shape.volume()
    }

    /// Unit volume with a unit kernel: a plain matrix-vector product.
    pub fn is_dense(&self) -> bool {
        self.in_shape.volume() == 1 && self.kernel_volume() == 1
    }

    pub fn output_len(&self) -> usize {
        self.out_channels * self.out_shape.volume()
    }
}

impl LayerSpec {
    pub fn conv(in_channels: usize, out_channels: usize, kernel: [usize; 3], input: Shape3, activation: Activation) -> Self {
        Self {
            kind: LayerKind::Conv3d {
                in_channels,
                out_channels,
                kernel,
                input,
            },
            activation,
        }
    }

    pub fn dense(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Self {
            kind: LayerKind::Dense { inputs, outputs },
            activation,
        }
    }

    pub fn geometry(&self) -> Geometry {
        let (in_channels, out_channels, kernel, in_shape) = match self.kind {
            LayerKind::Conv3d {
                in_channels,
                out_channels,
                kernel,
                input,
            } => (in_channels, out_channels, kernel, input),
            LayerKind::Dense { inputs, outputs } => (inputs, outputs, [1, 1, 1], Shape3::UNIT),
        };
        let out_shape = in_shape.stepped(kernel);
        let mut taps = Vec::with_capacity(out_shape.volume());
        for ot in 0..out_shape.t {
            for oh in 0..out_shape.h {
                for ow in 0..out_shape.w {
                    let mut site = Vec::new();
                    for a in 0..kernel[0] {
                        for b in 0..kernel[1] {
                            for c in 0..kernel[2] {
                                let (t, h, w) = (ot * kernel[0] + a, oh * kernel[1] + b, ow * kernel[2] + c);
                                if t < in_shape.t && h < in_shape.h && w < in_shape.w {
                                    let k = (a * kernel[1] + b) * kernel[2] + c;
                                    site.push((k, (t * in_shape.h + h) * in_shape.w + w));
                                }
                            }
                        }
                    }
                    taps.push(site);
                }
            }
        }
        Geometry {
            in_channels,
            out_channels,
            in_shape,
            out_shape,
            kernel,
            taps,
        }
    }

    pub fn input_len(&self) -> usize {
        match self.kind {
            LayerKind::Conv3d { in_channels, input, .. } => in_channels * input.volume(),
            LayerKind::Dense { inputs, .. } => inputs,
        }
    }

    pub fn output_len(&self) -> usize {
        match self.kind {
            LayerKind::Conv3d {
                out_channels,
                kernel,
                input,
                ..
            } => out_channels * input.stepped(kernel).volume(),
            LayerKind::Dense { outputs, .. } => outputs,
        }
    }

    pub fn out_channels(&self) -> usize {
        match self.kind {
            LayerKind::Conv3d { out_channels, .. } => out_channels,
            LayerKind::Dense { outputs, .. } => outputs,
        }
    }

    pub fn weight_count(&self) -> usize {
        match self.kind {
            LayerKind::Conv3d {
                in_channels,
                out_channels,
                kernel,
                ..
            } => in_channels * out_channels * kernel.iter().product::<usize>(),
            LayerKind::Dense { inputs, outputs } => inputs * outputs,
        }
    }

    pub fn param_count(&self) -> usize {
        self.weight_count() + self.out_channels()
    }

    /// Multiplies of one forward pass, counting every kernel tap of every
    /// output site (padding taps included).
    pub fn multiplications(&self) -> usize {
        match self.kind {
            LayerKind::Conv3d { kernel, input, .. } => input.stepped(kernel).volume() * self.weight_count(),
            LayerKind::Dense { .. } => self.weight_count(),
        }
    }
}

/// Two-layer fully connected head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HeadSpec {
    pub hidden: LayerSpec,
    pub output: LayerSpec,
}

impl HeadSpec {
    pub fn classes(&self) -> usize {
        self.output.output_len()
    }
}

/// Where a layer sits in the network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Placement {
    Frontend(usize),
    HeadHidden(usize),
    HeadOutput(usize),
}

/// Multi-task network for one check type: a shared frontend feeding `m + 1`
/// heads. Head 0 predicts the logical class, head `j >= 1` the bits of
/// syndrome piece `j - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkSpec {
    pub distance: usize,
    pub rounds: usize,
    pub check_type: CheckType,
    pub input: Shape3,
    pub frontend: Vec<LayerSpec>,
    pub heads: Vec<HeadSpec>,
    pub piece_sizes: Vec<usize>,
}

impl NetworkSpec {
    pub fn num_checks(&self) -> usize {
        (self.distance * self.distance - 1) / 2
    }

    pub fn input_len(&self) -> usize {
        self.input.volume()
    }

    pub fn frontend_output_len(&self) -> usize {
        self.frontend
            .last()
            .map(|l| l.output_len())
            .unwrap_or_else(|| self.input_len())
    }

    /// All layers in canonical order: frontend, then each head's hidden and
    /// output layers.
    pub fn layers(&self) -> Vec<(Placement, LayerSpec)> {
        let mut out: Vec<(Placement, LayerSpec)> = self
            .frontend
            .iter()
            .enumerate()
            .map(|(i, l)| (Placement::Frontend(i), *l))
            .collect();
        for (j, h) in self.heads.iter().enumerate() {
            out.push((Placement::HeadHidden(j), h.hidden));
            out.push((Placement::HeadOutput(j), h.output));
        }
        out
    }

    /// Layers on the longest input-to-output path.
    pub fn depth(&self) -> usize {
        self.frontend.len() + 2
    }

    pub fn layer_count(&self) -> usize {
        self.frontend.len() + 2 * self.heads.len()
    }

    pub fn param_count(&self) -> usize {
        self.layers().iter().map(|(_, l)| l.param_count()).sum()
    }

    pub fn multiplications(&self) -> usize {
        count_multiplications(self)
    }

    /// First syndrome bit of each piece.
    pub fn piece_offsets(&self) -> Vec<usize> {
        self.piece_sizes
            .iter()
            .scan(0, |acc, &s| {
                let start = *acc;
                *acc += s;
                Some(start)
            })
            .collect()
    }

    /// Input cell of each check: its plaquette corner in the `(L+1) x (L+1)` grid.
    pub fn input_cells(&self) -> Result<Vec<usize>> {
        let code = RscCode::new(self.distance)?;
        Ok(code
            .checks(self.check_type)
            .iter()
            .map(|c| c.plaquette.0 * self.input.w + c.plaquette.1)
            .collect())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidNetwork(msg));
        RscCode::new(self.distance)?;
        if self.input != Shape3::new(self.rounds, self.distance + 1, self.distance + 1) {
            return bad(format!("input volume {} does not match L and T", self.input));
        }
        let mut width = self.input_len();
        let mut shape = Some((1usize, self.input));
        for (i, l) in self.frontend.iter().enumerate() {
            match l.kind {
                LayerKind::Conv3d {
                    in_channels,
                    kernel,
                    input,
                    ..
                } => {
                    if shape != Some((in_channels, input)) {
                        return bad(format!("frontend layer {i}: conv input does not match previous output"));
                    }
                    if kernel.iter().any(|&k| k == 0) {
                        return bad(format!("frontend layer {i}: zero kernel extent"));
                    }
                    shape = Some((l.out_channels(), input.stepped(kernel)));
                }
                LayerKind::Dense { inputs, .. } => {
                    if inputs != width {
                        return bad(format!("frontend layer {i}: expects {inputs} inputs, got {width}"));
                    }
                    shape = None;
                }
            }
            width = l.output_len();
        }
        if self.piece_sizes.iter().sum::<usize>() != self.num_checks() || self.piece_sizes.contains(&0) {
            return bad("syndrome pieces must be nonempty and cover every check".into());
        }
        if self.heads.len() != self.piece_sizes.len() + 1 {
            return bad("need one class head plus one head per syndrome piece".into());
        }
        for (j, h) in self.heads.iter().enumerate() {
            let classes = if j == 0 { 2 } else { 1 << self.piece_sizes[j - 1] };
            let ok = matches!(h.hidden.kind, LayerKind::Dense { inputs, .. } if inputs == width)
                && matches!(h.output.kind, LayerKind::Dense { inputs, outputs }
                    if inputs == h.hidden.output_len() && outputs == classes)
                && h.output.activation == Activation::Identity;
            if !ok {
                return bad(format!("head {j} is malformed"));
            }
        }
        Ok(())
    }
}

/// Exact multiply count of one forward pass.
pub fn count_multiplications(spec: &NetworkSpec) -> usize {
    spec.layers().iter().map(|(_, l)| l.multiplications()).sum()
}

/// Widths used by [`default_spec`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpecWidths {
    pub conv_channels: usize,
    pub frontend_width: usize,
    pub head_hidden: usize,
    pub piece_size: usize,
}

impl Default for SpecWidths {
    fn default() -> Self {
        Self {
            conv_channels: 16,
            frontend_width: 128,
            head_hidden: 64,
            piece_size: 4,
        }
    }
}

const FRONTEND_ACT: Activation = Activation::LeakyRelu { shift: 3 };

/// Default network for `(L, T)` with default widths.
pub fn default_spec(distance: usize, rounds: usize, check_type: CheckType) -> Result<NetworkSpec> {
    spec_with_widths(distance, rounds, check_type, SpecWidths::default())
}

/// Stepper frontend plus heads. `L = 3` uses one `1x2x2` convolution and no
/// frontend FC; `L = 5` one `2x2x2` convolution, `L = 7` three, larger
/// distances step down to a unit volume. All but `L = 3` end in an FC layer.
pub fn spec_with_widths(
    distance: usize,
    rounds: usize,
    check_type: CheckType,
    widths: SpecWidths,
) -> Result<NetworkSpec> {
    RscCode::new(distance)?;
    if rounds == 0 {
        return Err(Error::InvalidNetwork("rounds must be positive".into()));
    }
    if widths.piece_size == 0 || widths.conv_channels == 0 || widths.head_hidden == 0 {
        return Err(Error::InvalidNetwork("widths must be positive".into()));
    }
    let input = Shape3::new(rounds, distance + 1, distance + 1);
    let c = widths.conv_channels;
    let mut frontend = Vec::new();
    let mut shape = input;
    let mut channels = 1;
    let mut push_conv = |kernel: [usize; 3], shape: &mut Shape3, channels: &mut usize| {
        frontend.push(LayerSpec::conv(*channels, c, kernel, *shape, FRONTEND_ACT));
        *shape = shape.stepped(kernel);
        *channels = c;
    };
    let step = |s: &Shape3| {
        let k = |n: usize| if n > 1 { 2 } else { 1 };
        [k(s.t), k(s.h), k(s.w)]
    };
    match distance {
        3 => push_conv([1, 2, 2], &mut shape, &mut channels),
        5 => push_conv(step(&shape), &mut shape, &mut channels),
        7 => {
            for _ in 0..3 {
                push_conv(step(&shape), &mut shape, &mut channels);
            }
        }
        _ => {
            while shape.volume() > 1 {
                push_conv(step(&shape), &mut shape, &mut channels);
            }
        }
    }
    let mut width = channels * shape.volume();
    if distance > 3 {
        frontend.push(LayerSpec::dense(width, widths.frontend_width, FRONTEND_ACT));
        width = widths.frontend_width;
    }
    let nc = (distance * distance - 1) / 2;
    let mut piece_sizes = vec![widths.piece_size; nc / widths.piece_size];
    if nc % widths.piece_size != 0 {
        piece_sizes.push(nc % widths.piece_size);
    }
    let head = |classes: usize| HeadSpec {
        hidden: LayerSpec::dense(width, widths.head_hidden, Activation::Relu),
        output: LayerSpec::dense(widths.head_hidden, classes, Activation::Identity),
    };
    let mut heads = vec![head(2)];
    heads.extend(piece_sizes.iter().map(|&s| head(1 << s)));
    let spec = NetworkSpec {
        distance,
        rounds,
        check_type,
        input,
        frontend,
        heads,
        piece_sizes,
    };
    spec.validate()?;
    Ok(spec)
}
