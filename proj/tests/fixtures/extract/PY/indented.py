def f():
    import requests
    try:
        import ujson as json
    except ImportError:
        import json
