package main

import (
	"fmt"
	"net/http"
	log "github.com/sirupsen/logrus"
	_ "github.com/lib/pq"
)
