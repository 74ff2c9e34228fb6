"""
End-to-end tests for the ``cell-tracker`` command line.

These run real experiments on ``experiments/smoke.ini`` through ``main()``
with no mocking and check the files a user would look at. They are marked
``e2e`` and ``slow``:

    pytest tests/e2e/ -v
"""
