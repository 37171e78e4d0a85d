"""Figure rendering for the phonoctl command-line outputs.

Consumes only the published file formats: schema-tagged CSV files, binary
grid files with the PHGRID1 magic, and their JSON sidecars.
"""

__version__ = "0.1.0"
