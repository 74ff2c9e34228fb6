"""Integration tests for the domain models.

Test Modules:
    test_state: ObjectState, GridGeometry, cell_of / cell_center, PointMeasurement
    test_frames: CellFrame and ThresholdedFrame validation and lookup
    test_belief: ParticleSet, BernoulliComponent and PmbBelief
"""
