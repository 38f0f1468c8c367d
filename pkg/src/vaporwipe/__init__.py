"""vaporwipe: deterministic simulator for vapor-assisted plane-normal
estimation on mirror/glass surfaces and contact-force-regulated wiping."""

__version__ = "0.1.0"
