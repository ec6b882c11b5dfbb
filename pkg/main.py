from tiletensor.api import app
