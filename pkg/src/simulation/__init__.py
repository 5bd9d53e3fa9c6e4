# Signal simulator package
