"""
omt-lab Test Suite

Test Organization:
- unit/: Exact cases and small-sample checks of each module
- integration/: End-to-end CLI runs; acceptance-scale runs need OMT_LAB_FULL_SCALE=1

See tests/README.md for detailed information on running and writing tests.
"""
