from .experiment_runner import build_message, main  # noqa: F401
