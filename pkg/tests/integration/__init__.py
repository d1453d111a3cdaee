"""
Integration tests for omt-lab.

End-to-end CLI runs at reduced scale always run. The acceptance-scale
statistical runs are skipped unless OMT_LAB_FULL_SCALE is set.
"""
