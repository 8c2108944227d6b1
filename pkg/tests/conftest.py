import hypothesis

hypothesis.settings.register_profile(
    "suite", deadline=None, derandomize=True, max_examples=25)
hypothesis.settings.load_profile("suite")
