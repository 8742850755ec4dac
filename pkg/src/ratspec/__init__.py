"""ratspec: spectra, homoclinic diagnostics and degeneration limits of rational maps on P^1."""

__version__ = "0.1.0"
