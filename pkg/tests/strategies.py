"""Hypothesis strategies for randomized stacks."""

from hypothesis import strategies as st

from distpnr.materials import NBTIN, VACUUM, EffectiveMedium, Material
from distpnr.optics import Layer, Mirror, Open, Stack

indices = st.floats(1.0, 4.0)
losses = st.floats(0.0, 3.0)
thicknesses = st.floats(0.0, 200.0)
wavelengths = st.floats(400.0, 2000.0)


@st.composite
def layers(draw):
    if draw(st.booleans()):
        f = draw(st.floats(0.05, 1.0))
        slit = Material.constant("slit", draw(st.sampled_from([1.0, 2.25])))
        return Layer(EffectiveMedium(NBTIN, slit, f), draw(st.floats(0.0, 60.0)), "detector")
    n = complex(draw(indices), draw(losses))
    return Layer(Material.from_index("m", n), draw(thicknesses), "layer")


@st.composite
def open_stacks(draw, max_layers=6):
    ls = draw(st.lists(layers(), min_size=0, max_size=max_layers))
    left = Material.from_index("left", draw(st.floats(1.0, 2.0)))
    right = draw(st.sampled_from([VACUUM, Material.from_index("right", 1.45)]))
    return Stack(tuple(ls), left, Open(right))


@st.composite
def mirror_stacks(draw, max_layers=5):
    ls = draw(st.lists(layers(), min_size=0, max_size=max_layers))
    ls.append(Layer(Material.from_index("spacer", 1.5), draw(thicknesses), "spacer"))
    return Stack(tuple(ls), VACUUM, Mirror(draw(st.floats(0.5, 0.999)), 1.5))


@st.composite
def lossless_stacks(draw, max_layers=6):
    ls = [
        Layer(Material.from_index("d", draw(indices)), draw(thicknesses))
        for _ in range(draw(st.integers(0, max_layers)))
    ]
    return Stack(tuple(ls))
