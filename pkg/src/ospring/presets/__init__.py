"""Bundled run-configuration presets.

fig2c / fig2d  membrane interferometer detuning sweeps of spring and
               damping (narrowband and exact kernel respectively);
fig3a - fig3d  free-mass sweeps at dissipative-to-recycling linewidth
               ratios 1/3, 1/2, 3/4 and 1;
fig4a / fig4b  back-action noise spectra with a fully reflective and a
               partially transmissive recycling mirror.
"""

from importlib.resources import files

PRESET_NAMES = ("fig2c", "fig2d", "fig3a", "fig3b", "fig3c", "fig3d", "fig4a", "fig4b")

PRESET_METHODS = {
    "fig2c": "narrowband",
    "fig2d": "exact",
    "fig3a": "freemass",
    "fig3b": "freemass",
    "fig3c": "freemass",
    "fig3d": "freemass",
}

PRESET_SUBCOMMANDS = {name: "spectrum" if name.startswith("fig4") else "backaction"
                      for name in PRESET_NAMES}


def preset_path(name: str) -> str:
    """Filesystem path of a bundled preset configuration."""
    if name not in PRESET_NAMES:
        raise KeyError(f"unknown preset {name!r}; pick one of {', '.join(PRESET_NAMES)}")
    return str(files(__package__).joinpath(f"{name}.cfg"))
