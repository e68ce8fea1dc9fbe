# Middleware module
